import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .errors import ConfigError
from .geometry import NodeSpec
from .link import JamInterval, merge_spans
from .rng import FloatArray, RngStream

# exponential draws per refill of a lazily realized emission train
CHUNK = 4096


class JammerKind(Enum):
    CONSTANT = "Constant"
    DECEPTIVE = "Deceptive"
    RANDOM = "Random"
    REACTIVE = "Reactive"


@dataclass(frozen=True)
class JammerSpec:
    kind: JammerKind
    node: NodeSpec
    eps_jmax: float = 0.02
    j50: float = 25.0
    j_slope: float = 5.0
    on_mean: float = 0.5
    off_mean: float = 0.5
    pkt_rate: float = 5000.0
    pkt_airtime: float = 1.6e-4
    sense_prob: float = 0.8
    sense_range: float = 20.0
    reaction_delay: float = 1.2e-5
    active_window: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self) -> None:
        errors = []
        for name in ("eps_jmax", "sense_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                errors.append(f"{name}: must be a probability in [0, 1]")
        for name in ("j_slope", "on_mean", "off_mean", "pkt_airtime", "reaction_delay"):
            if not getattr(self, name) > 0:
                errors.append(f"{name}: must be > 0")
        if self.pkt_rate < 0:
            errors.append("pkt_rate: must be >= 0")
        if self.sense_range < 0:
            errors.append("sense_range: must be >= 0")
        t_on, t_off = self.active_window
        if not t_on < t_off:
            errors.append("active_window: t_on must be < t_off")
        if errors:
            raise ConfigError(errors)

    @property
    def name(self) -> str:
        return f"{self.kind.value}@{self.node.id}"


def jam_effect(d_j: float, spec: JammerSpec) -> float:
    return spec.eps_jmax * float(expit((spec.j50 - d_j) / spec.j_slope))


class JammerSchedule:
    """Realized emissions of one jammer.

    Random ON phases and Deceptive packet trains are drawn lazily, in order,
    from the jammer's own stream, so every query sees the same realization.
    """

    def __init__(self, spec: JammerSpec, rng: RngStream) -> None:
        self.spec = spec
        self.rng = rng
        self.sense_rng = rng.child("sense")
        self.t_on, self.t_off = spec.active_window
        self._starts: FloatArray = np.empty(0)
        self._ends: FloatArray = np.empty(0)
        self._cursor = self.t_on
        self._reactive_spans: list[tuple[float, float]] = []

        if spec.kind is JammerKind.RANDOM:
            duty = spec.on_mean / (spec.on_mean + spec.off_mean)
            # stationary start: ON with probability equal to the duty cycle
            self._next_on = self.rng.random() < duty
        elif spec.kind is JammerKind.DECEPTIVE and spec.pkt_rate == 0:
            self._cursor = math.inf

    def is_active(self, t: float) -> bool:
        return self.t_on <= t < self.t_off

    def _extend(self) -> None:
        spec = self.spec
        if spec.kind is JammerKind.RANDOM:
            ons = self.rng.exponential_array(spec.on_mean, CHUNK)
            offs = self.rng.exponential_array(spec.off_mean, CHUNK)
            pairs = (ons, offs) if self._next_on else (offs, ons)
            durations = np.column_stack(pairs).ravel()
            edges = self._cursor + np.concatenate(([0.0], np.cumsum(durations)))
            first_on = 0 if self._next_on else 1
            starts = edges[first_on:-1:2]
            ends = edges[first_on + 1 :: 2]
            self._cursor = float(edges[-1])
        else:
            gaps = self.rng.exponential_array(1.0 / spec.pkt_rate, CHUNK)
            starts = self._cursor + np.cumsum(gaps)
            ends = starts + spec.pkt_airtime
            self._cursor = float(starts[-1])
        self._starts = np.concatenate((self._starts, starts))
        self._ends = np.concatenate((self._ends, ends))

    def _realize_until(self, t: float) -> None:
        while self._cursor < min(t, self.t_off):
            self._extend()

    def _emissions(self, a: float, b: float) -> list[tuple[float, float]]:
        lo, hi = max(a, self.t_on), min(b, self.t_off)
        if hi <= lo:
            return []
        kind = self.spec.kind
        if kind is JammerKind.CONSTANT:
            return [(lo, hi)]
        if kind is JammerKind.REACTIVE:
            return merge_spans(
                [(max(s, lo), min(e, hi)) for s, e in self._reactive_spans if s < hi and e > lo]
            )
        self._realize_until(hi)
        i0 = int(np.searchsorted(self._ends, lo, side="right"))
        i1 = int(np.searchsorted(self._starts, hi, side="left"))
        spans = [
            (max(float(s), lo), min(float(e), hi))
            for s, e in zip(self._starts[i0:i1], self._ends[i0:i1])
        ]
        return merge_spans([(s, e) for s, e in spans if e > s])

    def jam_intervals(
        self,
        t_start: float,
        airtime: float,
        tx_events_visible: bool,
        receiver_distance: Callable[[float], float],
    ) -> list[JamInterval]:
        t_end = t_start + airtime
        spans: list[tuple[float, float]] = []
        if self.spec.kind is JammerKind.REACTIVE:
            if tx_events_visible and self.is_active(t_start):
                if self.sense_rng.random() < self.spec.sense_prob:
                    start = t_start + self.spec.reaction_delay
                    end = min(t_end, self.t_off)
                    if end > start:
                        spans = [(start, end)]
                        self._reactive_spans.append((start, end))
        else:
            spans = self._emissions(t_start, t_end)
        return [
            (start, end, jam_effect(receiver_distance(0.5 * (start + end)), self.spec))
            for start, end in spans
        ]

    def channel_busy(self, t: float) -> bool:
        if self.spec.kind is not JammerKind.DECEPTIVE or not self.is_active(t):
            return False
        self._realize_until(t)
        lo = int(np.searchsorted(self._starts, t - self.spec.pkt_airtime, side="right"))
        hi = int(np.searchsorted(self._starts, t, side="right"))
        return hi > lo

    def on_time(self, t0: float, t1: float) -> float:
        return sum(end - start for start, end in self._emissions(t0, t1))

    def forget_before(self, t: float) -> None:
        keep = int(np.searchsorted(self._ends, t, side="left"))
        if keep:
            self._starts = self._starts[keep:]
            self._ends = self._ends[keep:]
        self._reactive_spans = [(s, e) for s, e in self._reactive_spans if e >= t]
