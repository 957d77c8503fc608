import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .calibration import ThresholdCurve, build_threshold_curve, load_curve, run_sweep
from .detector import JammingHook, LinkDetector, VerdictRecord, log_jamming
from .errors import ConfigError
from .geometry import NodeSpec, distance, position_at, positions_at
from .jammer import JammerKind, JammerSchedule
from .link import JamInterval, Outcome, PacketAttempt, not_sent, transmit_packet
from .rng import RngStream
from .scenario import ScenarioConfig
from .stats import WindowStats, record


@dataclass
class SimClock:
    epoch_length: float = 1.0
    now: float = 0.0

    def __post_init__(self) -> None:
        if not self.epoch_length > 0:
            raise ValueError("epoch_length must be > 0")

    def advance(self, t: float) -> None:
        if t < self.now:
            raise ValueError(f"clock cannot move backwards from {self.now} to {t}")
        self.now = t

    def epoch_start(self, epoch: int) -> float:
        return epoch * self.epoch_length


class EpochRow(NamedTuple):
    t_s: float
    stats: WindowStats
    verdict: VerdictRecord


class JammerUsage(NamedTuple):
    index: int
    name: str
    kind: str
    node: str
    on_time_s: float
    duty: float


@dataclass
class SimTrace:
    seed: int
    curve: ThresholdCurve
    attempts: list[PacketAttempt] = field(default_factory=list)
    epochs: list[EpochRow] = field(default_factory=list)
    jammers: list[JammerUsage] = field(default_factory=list)

    @property
    def verdicts(self) -> list[VerdictRecord]:
        return [row.verdict for row in self.epochs]


def resolve_curve(config: ScenarioConfig, seed: int) -> ThresholdCurve:
    settings = config.detector
    if settings.curve_path is not None:
        curve = load_curve(settings.curve_path, config.link_params)
        logging.info("Loaded threshold curve: %s", settings.curve_path)
        return curve
    sweep = settings.sweep
    if sweep is None:
        raise ConfigError("detector: either 'curve' or 'sweep' is required")
    samples = run_sweep(
        config.link_params,
        sweep.d_min,
        sweep.d_max if sweep.d_max is not None else config.d_max,
        sweep.step,
        sweep.n_packets,
        seed,
    )
    return build_threshold_curve(
        samples,
        settings.margin(config.sim.attempts_per_epoch),
        config.d_max,
        config.link_params.fingerprint(),
    )


def _receiver_distance(jammer: NodeSpec, rx: NodeSpec) -> Callable[[float], float]:
    lo = max(jammer.t_first, rx.t_first)
    hi = min(jammer.t_last, rx.t_last)

    def at(t: float) -> float:
        # a packet airing past the last waypoint sees the final positions
        t = min(max(t, lo), hi)
        return distance(position_at(jammer, t), position_at(rx, t))

    return at


def run_scenario(
    config: ScenarioConfig,
    seed: int,
    curve: ThresholdCurve | None = None,
    on_jamming: JammingHook = log_jamming,
) -> SimTrace:
    if curve is None:
        curve = resolve_curve(config, seed)

    params = config.link_params
    sim = config.sim
    clock = SimClock(sim.epoch_length)
    airtime = params.airtime
    spacing = sim.epoch_length / sim.attempts_per_epoch
    geometric = config.detector.d_source == "geometric"

    links = [(config.node(tx), config.node(rx)) for tx, rx in config.links]
    link_rngs = [RngStream(seed, f"link/{tx.id}-{rx.id}") for tx, rx in links]
    detectors = [
        LinkDetector((tx.id, rx.id), curve, sim.n_min, on_jamming) for tx, rx in links
    ]
    schedules = [
        JammerSchedule(spec, RngStream(seed, f"jammer/{i}/{spec.node.id}"))
        for i, spec in enumerate(config.jammers)
    ]
    reach = [
        [_receiver_distance(s.spec.node, rx) for _, rx in links] for s in schedules
    ]
    on_time = [0.0] * len(schedules)

    trace = SimTrace(seed=seed, curve=curve)
    for epoch in range(sim.n_epochs):
        t0 = clock.epoch_start(epoch)
        t1 = clock.epoch_start(epoch + 1)
        times = t0 + np.arange(sim.attempts_per_epoch) * spacing
        node_pos = {n.id: positions_at(n, times) for n in config.nodes}

        windows = [WindowStats(epoch) for _ in links]
        ranged: list[float | None] = [None] * len(links)
        attacked = [False] * len(links)

        for k, t in enumerate(times.tolist()):
            clock.advance(t)
            for li, (tx, rx) in enumerate(links):
                tx_pos = node_pos[tx.id][k]
                d = float(np.linalg.norm(tx_pos - node_pos[rx.id][k]))
                link_id = (tx.id, rx.id)
                in_range = [
                    float(np.linalg.norm(node_pos[s.spec.node.id][k] - tx_pos))
                    <= s.spec.sense_range
                    for s in schedules
                ]
                # clear-channel assessment defers only to protocol-compliant traffic
                blocked = any(
                    in_range[ji] and sched.spec.kind is JammerKind.DECEPTIVE
                    and sched.channel_busy(t)
                    for ji, sched in enumerate(schedules)
                )

                if blocked:
                    attempt = not_sent(t, link_id, d)
                    attacked[li] = True
                else:
                    intervals: list[JamInterval] = []
                    for ji, sched in enumerate(schedules):
                        intervals.extend(
                            sched.jam_intervals(t, airtime, in_range[ji], reach[ji][li])
                        )
                    attempt = transmit_packet(d, intervals, params, link_rngs[li], t, link_id)
                    if attempt.jam_overlap > 0:
                        attacked[li] = True
                    if attempt.outcome is Outcome.DELIVERED:
                        ranged[li] = d
                record(attempt, windows[li], sim.epoch_length)
                trace.attempts.append(attempt)

        mid = 0.5 * (t0 + t1)
        for li, (tx, rx) in enumerate(links):
            fallback = distance(position_at(tx, mid), position_at(rx, mid))
            rec = detectors[li].observe(
                windows[li],
                fallback if geometric else ranged[li],
                fallback,
                attacked[li],
            )
            trace.epochs.append(EpochRow(t0, windows[li], rec))

        for ji, sched in enumerate(schedules):
            on_time[ji] += sched.on_time(t0, t1)
            sched.forget_before(t1)
        clock.advance(t1)

    span = sim.n_epochs * sim.epoch_length
    trace.jammers = [
        JammerUsage(
            ji,
            sched.spec.name,
            sched.spec.kind.value,
            sched.spec.node.id,
            on_time[ji],
            on_time[ji] / span,
        )
        for ji, sched in enumerate(schedules)
    ]
    logging.info(
        "Simulated %d epochs on %d links with %d jammers: %d attempts",
        sim.n_epochs,
        len(links),
        len(schedules),
        len(trace.attempts),
    )
    return trace
