import math
from typing import Any

import numpy as np
import pytest

from jamguard.calibration import ThresholdCurve, threshold_at
from jamguard.detector import Verdict, VerdictRecord, decide
from jamguard.geometry import NodeRole, NodeSpec
from jamguard.harness import run_experiment
from jamguard.jammer import JammerKind, JammerSchedule, JammerSpec
from jamguard.link import LinkParams, Outcome, packet_success_prob, transmit_packet
from jamguard.metrics import median_latency
from jamguard.rng import RngStream
from jamguard.scenario import parse_scenario
from jamguard.sim import resolve_curve, run_scenario

pytestmark = pytest.mark.slow

SLOT = 0.02


def jammer(kind: JammerKind, **kwargs: Any) -> JammerSpec:
    node = NodeSpec.stationary("jam1", (0.0, 0.0, 0.0), 1e6, NodeRole.JAMMER_HOST)
    return JammerSpec(kind=kind, node=node, **kwargs)


def silent_hook(_rec: VerdictRecord) -> None:
    pass


def test_weak_signal_false_positive_rate() -> None:
    epochs = 10_000
    config = parse_scenario(
        {
            "seed": 21,
            "sim": {"duration": epochs},
            "nodes": [
                {"id": "base", "position": [0, 0, 0]},
                {"id": "uav1", "waypoints": [[0, [5, 0, 0]], [epochs, [29, 0, 0]]]},
            ],
            "links": [["base", "uav1"]],
        }
    )
    trace, report = run_experiment(config)
    assert len(trace.epochs) == epochs
    assert report.fpr is not None
    assert report.fpr <= 0.01
    assert report.tpr is None


def test_constant_jammer_detection_power() -> None:
    raw = {
        "sim": {"duration": 4},
        "nodes": [
            {"id": "uav1", "position": [0, 0, 0]},
            {"id": "uav2", "position": [10, 0, 0]},
            {"id": "jam1", "role": "jammer-host", "position": [15, 0, 0]},
        ],
        "links": [["uav1", "uav2"]],
        "jammers": [{"kind": "Constant", "node": "jam1", "active_window": [2, None]}],
    }
    config = parse_scenario(raw)
    curve = resolve_curve(config, 0)

    positives = detected = 0
    latencies: list[int | None] = []
    for seed in range(1000):
        trace = run_scenario(config, seed, curve, on_jamming=silent_hook)
        jammed = [rec for rec in trace.verdicts if rec.truth]
        positives += len(jammed)
        detected += sum(rec.verdict is Verdict.JAMMING for rec in jammed)
        first = next(
            (rec.epoch_index for rec in jammed if rec.verdict is Verdict.JAMMING), None
        )
        latencies.append(None if first is None else first - 2)

    assert detected / positives >= 0.99
    latency = median_latency(latencies)
    assert latency is not None
    assert latency <= 2


def test_exceptional_case_never_jamming() -> None:
    rng = np.random.default_rng(4)
    for _ in range(100_000):
        d_max = float(rng.uniform(1.0, 100.0))
        n = int(rng.integers(2, 8))
        thresholds = tuple(float(x) for x in np.sort(rng.uniform(0.0, 1.0, n))[::-1])
        curve = ThresholdCurve(
            tuple(float(x) for x in np.linspace(0.0, d_max, n)), thresholds, d_max
        )
        d = float(rng.uniform(d_max, 3.0 * d_max))
        assert decide(float(rng.uniform()), d, curve) is Verdict.NO_JAMMING


def test_decision_truth_table() -> None:
    rng = np.random.default_rng(5)
    curve = ThresholdCurve((0.0, 10.0, 20.0, 30.0), (0.95, 0.93, 0.88, 0.80), 30.0)
    for i in range(100_000):
        d = float(rng.uniform(0.0, 60.0))
        thr = threshold_at(curve, d)
        # every fourth case sits exactly on the threshold
        pdr_value = thr if i % 4 == 0 else float(rng.uniform())
        expected = Verdict.JAMMING if (pdr_value < thr and d < 30.0) else Verdict.NO_JAMMING
        assert decide(pdr_value, d, curve) is expected
    assert decide(0.0, 30.0, curve) is Verdict.NO_JAMMING


@pytest.mark.parametrize("d", [10.0, 20.0, 30.0, 40.0])
def test_channel_matches_closed_form(d: float) -> None:
    params = LinkParams()
    n = 100_000
    rng = RngStream(17, f"oracle/{d!r}")
    delivered = sum(
        transmit_packet(d, [], params, rng).outcome is Outcome.DELIVERED for _ in range(n)
    )
    expected = packet_success_prob(d, 0.0, params)
    sigma = math.sqrt(expected * (1.0 - expected) / n)
    assert abs(delivered / n - expected) <= 3.0 * sigma


def test_random_jammer_duty_cycle() -> None:
    spec = jammer(JammerKind.RANDOM, on_mean=0.5, off_mean=0.5)
    sched = JammerSchedule(spec, RngStream(3, "duty"))
    horizon = 1_000_000 * SLOT
    assert sched.on_time(0.0, horizon) / horizon == pytest.approx(0.5, abs=0.02)


def test_deceptive_busy_fraction() -> None:
    spec = jammer(JammerKind.DECEPTIVE, pkt_rate=5000.0, pkt_airtime=1.6e-4)
    sched = JammerSchedule(spec, RngStream(3, "busy"))
    times = np.arange(40_000) * 1e-3
    busy = sum(sched.channel_busy(float(t)) for t in times)
    assert busy / len(times) == pytest.approx(1.0 - math.exp(-0.8), abs=0.02)


def test_reactive_silent_channel() -> None:
    sched = JammerSchedule(jammer(JammerKind.REACTIVE, sense_prob=1.0), RngStream(3, "r"))
    for t in np.arange(0.0, 10.0, SLOT):
        assert sched.jam_intervals(float(t), 1.6e-4, False, lambda _t: 5.0) == []
    assert sched.on_time(0.0, 10.0) == 0.0


def test_constant_covers_active_airtime() -> None:
    spec = jammer(JammerKind.CONSTANT, active_window=(3.0, 8.0))
    sched = JammerSchedule(spec, RngStream(3, "c"))
    assert sched.on_time(0.0, 10.0) == 5.0
    for t in np.arange(3.0, 8.0 - 1e-3, 0.25):
        ((start, end, _),) = sched.jam_intervals(float(t), 1.6e-4, False, lambda _t: 5.0)
        assert end - start == pytest.approx(1.6e-4)
