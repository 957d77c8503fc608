import logging
from collections.abc import Callable
from enum import Enum
from typing import NamedTuple

from .calibration import ThresholdCurve, threshold_at
from .config import Config
from .stats import WindowStats, pdr


class Verdict(Enum):
    JAMMING = "Jamming"
    NO_JAMMING = "NoJamming"
    INSUFFICIENT = "Insufficient"


class VerdictRecord(NamedTuple):
    epoch_index: int
    link: tuple[str, str]
    d_used: float
    stale: bool
    pdr_used: float | None
    thr: float
    verdict: Verdict
    truth: bool
    n_samples: int


def decide(pdr_value: float, d: float, curve: ThresholdCurve) -> Verdict:
    # strict comparisons: equality on either side is not an attack
    if d < curve.d_max and pdr_value < threshold_at(curve, d):
        return Verdict.JAMMING
    return Verdict.NO_JAMMING


def step(
    w: WindowStats,
    d: float,
    curve: ThresholdCurve,
    truth: bool,
    n_min: int = Config.DEFAULT_N_MIN,
    *,
    link: tuple[str, str] = ("", ""),
    stale: bool = False,
) -> VerdictRecord:
    pdr_value = pdr(w)
    if pdr_value is None or w.sent < n_min:
        verdict = Verdict.INSUFFICIENT
    else:
        verdict = decide(pdr_value, d, curve)
    return VerdictRecord(
        epoch_index=w.epoch_index,
        link=link,
        d_used=d,
        stale=stale,
        pdr_used=pdr_value,
        thr=threshold_at(curve, d),
        verdict=verdict,
        truth=truth,
        n_samples=w.sent,
    )


JammingHook = Callable[[VerdictRecord], None]


def log_jamming(rec: VerdictRecord) -> None:
    logging.warning(
        "Jamming detected on %s->%s in epoch %d: PDR %.3f < threshold %.3f at %.2f m",
        rec.link[0],
        rec.link[1],
        rec.epoch_index,
        rec.pdr_used if rec.pdr_used is not None else float("nan"),
        rec.thr,
        rec.d_used,
    )


class LinkDetector:
    def __init__(
        self,
        link: tuple[str, str],
        curve: ThresholdCurve,
        n_min: int = Config.DEFAULT_N_MIN,
        on_jamming: JammingHook = log_jamming,
    ) -> None:
        self.link = link
        self.curve = curve
        self.n_min = n_min
        self.on_jamming = on_jamming
        self.last_good_d: float | None = None
        self.last_epoch: int | None = None

    def observe(
        self,
        w: WindowStats,
        ranged_d: float | None,
        fallback_d: float,
        truth: bool,
    ) -> VerdictRecord:
        """Emit the verdict for one finished epoch.

        ranged_d is the distance from the epoch's last successful ranging
        exchange; without one the last good value is reused and flagged stale.
        """
        if self.last_epoch is not None and w.epoch_index <= self.last_epoch:
            raise ValueError(
                f"epoch {w.epoch_index} already decided for {self.link[0]}->{self.link[1]}"
            )
        self.last_epoch = w.epoch_index

        stale = ranged_d is None
        if ranged_d is not None:
            self.last_good_d = ranged_d
        d_used = self.last_good_d if self.last_good_d is not None else fallback_d

        rec = step(w, d_used, self.curve, truth, self.n_min, link=self.link, stale=stale)
        logging.debug(
            "Epoch %d %s->%s: %s (pdr=%s thr=%.3f d=%.2f)",
            rec.epoch_index,
            self.link[0],
            self.link[1],
            rec.verdict.value,
            rec.pdr_used,
            rec.thr,
            rec.d_used,
        )
        if rec.verdict is Verdict.JAMMING:
            self.on_jamming(rec)
        return rec
