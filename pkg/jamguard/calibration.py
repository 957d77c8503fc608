import csv
import json
import logging
import math
import os
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np

from .config import Config
from .errors import ConfigError
from .link import LinkParams, Outcome, transmit_packet
from .rng import RngStream

CURVE_HEADER = ("d_m", "pdr_thr")


class CalibrationSample(NamedTuple):
    d: float
    pdr_hat: float
    n_packets: int


class MarginPolicy(NamedTuple):
    z: float = Config.DEFAULT_Z
    n_runtime: int = Config.DEFAULT_ATTEMPTS_PER_EPOCH


@dataclass(frozen=True)
class ThresholdCurve:
    distances: tuple[float, ...]
    thresholds: tuple[float, ...]
    d_max: float
    margin: MarginPolicy = MarginPolicy()
    link_fingerprint: str | None = None

    def __post_init__(self) -> None:
        errors = []
        if len(self.distances) < 2 or len(self.distances) != len(self.thresholds):
            errors.append("curve: need at least 2 knots with one threshold each")
        if any(b <= a for a, b in zip(self.distances, self.distances[1:])):
            errors.append("curve: knot distances must be strictly increasing")
        if any(d < 0 or not math.isfinite(d) for d in self.distances):
            errors.append("curve: knot distances must be finite and >= 0")
        if any(not 0.0 <= thr <= 1.0 for thr in self.thresholds):
            errors.append("curve: thresholds must lie in [0, 1]")
        if any(b > a for a, b in zip(self.thresholds, self.thresholds[1:])):
            errors.append("curve: thresholds must be non-increasing in distance")
        if not self.d_max > 0:
            errors.append("curve: d_max must be > 0")
        if errors:
            raise ConfigError(errors)

    @property
    def knots(self) -> list[tuple[float, float]]:
        return list(zip(self.distances, self.thresholds))


def sweep_grid(d_min: float, d_max_sweep: float, step: float) -> list[float]:
    if not step > 0:
        raise ConfigError("sweep.step: must be > 0")
    if d_min < 0 or not d_min < d_max_sweep:
        raise ConfigError("sweep: require 0 <= d_min < d_max")
    count = math.floor((d_max_sweep - d_min) / step + 1e-9) + 1
    if count < 1:
        raise ConfigError("sweep: grid has no points")
    return [d_min + i * step for i in range(count)]


def run_sweep(
    link: LinkParams,
    d_min: float,
    d_max_sweep: float,
    step: float,
    n_packets: int,
    seed: int,
) -> list[CalibrationSample]:
    if n_packets < 1:
        raise ConfigError("sweep.n_packets: must be >= 1")
    grid = sweep_grid(d_min, d_max_sweep, step)
    airtime = link.airtime
    samples = []
    for d in grid:
        rng = RngStream(seed, f"calibration/{d!r}")
        delivered = sum(
            transmit_packet(d, [], link, rng, t_start=i * airtime).outcome is Outcome.DELIVERED
            for i in range(n_packets)
        )
        samples.append(CalibrationSample(d, delivered / n_packets, n_packets))
    logging.info(
        "Calibration sweep finished: %d distances from %.3g m to %.3g m, %d packets each",
        len(samples),
        grid[0],
        grid[-1],
        n_packets,
    )
    return samples


def build_threshold_curve(
    samples: Iterable[CalibrationSample],
    margin: MarginPolicy,
    d_max: float,
    link_fingerprint: str | None = None,
) -> ThresholdCurve:
    ordered = sorted(samples, key=lambda s: s.d)
    if len(ordered) < 2:
        raise ConfigError("calibration: at least 2 samples are required")
    if margin.n_runtime < 1:
        raise ConfigError("detector.n_runtime: must be >= 1")

    d = np.array([s.d for s in ordered], dtype=float)
    p = np.array([s.pdr_hat for s in ordered], dtype=float)
    thr = np.clip(p - margin.z * np.sqrt(p * (1.0 - p) / margin.n_runtime), 0.0, 1.0)
    # link quality cannot improve with distance; running minimum from the near end
    thr = np.minimum.accumulate(thr)

    return ThresholdCurve(
        distances=tuple(float(x) for x in d),
        thresholds=tuple(float(x) for x in thr),
        d_max=d_max,
        margin=margin,
        link_fingerprint=link_fingerprint,
    )


def threshold_at(curve: ThresholdCurve, d: float) -> float:
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    d_last = curve.distances[-1]
    if d <= d_last:
        return float(np.interp(d, curve.distances, curve.thresholds))
    slope = (curve.thresholds[-1] - curve.thresholds[-2]) / (d_last - curve.distances[-2])
    return min(max(curve.thresholds[-1] + (d - d_last) * slope, 0.0), 1.0)


def curve_meta_path(csv_path: str) -> str:
    return os.path.splitext(csv_path)[0] + ".json"


def save_curve(curve: ThresholdCurve, csv_path: str) -> str:
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        # repr keeps the shortest text that parses back to the same double
        writer.writerows((repr(d), repr(thr)) for d, thr in curve.knots)

    meta: dict[str, Any] = {
        "d_max": curve.d_max,
        "z": curve.margin.z,
        "n_runtime": curve.margin.n_runtime,
        "link_fingerprint": curve.link_fingerprint,
    }
    meta_path = curve_meta_path(csv_path)
    with open(meta_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, indent=4, sort_keys=True)
        f.write("\n")

    logging.info("Wrote threshold curve with %d knots: %s", len(curve.distances), csv_path)
    return meta_path


def load_curve(csv_path: str, link: LinkParams | None = None) -> ThresholdCurve:
    meta_path = curve_meta_path(csv_path)
    try:
        with open(csv_path, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        with open(meta_path, encoding="utf-8") as f:
            meta = json.load(f)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"detector.curve: failed to read curve '{csv_path}': {err}") from err

    if not rows or tuple(rows[0]) != CURVE_HEADER:
        raise ConfigError(f"detector.curve: '{csv_path}' must start with header d_m,pdr_thr")

    try:
        knots = [(float(d), float(thr)) for d, thr in rows[1:]]
        margin = MarginPolicy(float(meta["z"]), int(meta["n_runtime"]))
        d_max = float(meta["d_max"])
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"detector.curve: malformed curve '{csv_path}': {err}") from err

    fingerprint = meta.get("link_fingerprint")
    if link is not None and fingerprint and fingerprint != link.fingerprint():
        logging.warning(
            "Curve '%s' was calibrated for different link parameters (%s != %s)",
            csv_path,
            fingerprint,
            link.fingerprint(),
        )

    return ThresholdCurve(
        distances=tuple(d for d, _ in knots),
        thresholds=tuple(thr for _, thr in knots),
        d_max=d_max,
        margin=margin,
        link_fingerprint=fingerprint,
    )
