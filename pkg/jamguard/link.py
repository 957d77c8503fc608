import hashlib
import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .errors import ConfigError
from .rng import RngStream

# (start, end, added per-bit error probability)
JamInterval = tuple[float, float, float]

PER_BIT_CEILING = 0.5
# in bits; absorbs rounding when an interval edge sits on a bit boundary
BIT_EDGE_TOLERANCE = 1e-3


class Outcome(Enum):
    NOT_SENT = "NotSent"
    LOST_SYNC = "LostSync"
    RECEIVED_ERRONEOUS = "ReceivedErroneous"
    DELIVERED = "Delivered"


@dataclass(frozen=True)
class LinkParams:
    eps_min: float = 1e-5
    eps_max: float = 5e-3
    d50: float = 50.0
    slope: float = 5.0
    shr_bits: int = 64
    payload_bits: int = 1024
    bitrate: float = 6.8e6
    d_max: float = 30.0

    def __post_init__(self) -> None:
        errors = []
        if not 0.0 <= self.eps_min < self.eps_max <= PER_BIT_CEILING:
            errors.append("link_params: require 0 <= eps_min < eps_max <= 0.5")
        if not self.slope > 0:
            errors.append("link_params.slope: must be > 0")
        if self.shr_bits < 1:
            errors.append("link_params.shr_bits: must be >= 1")
        if self.payload_bits < 1:
            errors.append("link_params.payload_bits: must be >= 1")
        if not self.bitrate > 0:
            errors.append("link_params.bitrate: must be > 0")
        if not self.d_max > 0:
            errors.append("link_params.d_max: must be > 0")
        if errors:
            raise ConfigError(errors)

    @property
    def bits_total(self) -> int:
        return self.shr_bits + self.payload_bits

    @property
    def airtime(self) -> float:
        return self.bits_total / self.bitrate

    @property
    def shr_airtime(self) -> float:
        return self.shr_bits / self.bitrate

    def fingerprint(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


class PacketAttempt(NamedTuple):
    t_start: float
    link: tuple[str, str]
    d: float
    outcome: Outcome
    bit_errors: int
    bits_total: int
    jam_overlap: float


def base_bit_error_prob(d: float, p: LinkParams) -> float:
    return p.eps_min + (p.eps_max - p.eps_min) * float(expit((d - p.d50) / p.slope))


def clamp_bit_prob(eps: float) -> float:
    return min(max(eps, 0.0), PER_BIT_CEILING)


def packet_success_prob(d: float, eps_jam: float, p: LinkParams) -> float:
    eps = clamp_bit_prob(base_bit_error_prob(d, p) + eps_jam)
    return math.exp(p.bits_total * math.log1p(-eps))


def not_sent(t_start: float, link: tuple[str, str], d: float) -> PacketAttempt:
    return PacketAttempt(t_start, link, d, Outcome.NOT_SENT, 0, 0, 0.0)


def merge_spans(spans: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for start, end in sorted(spans):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def covered_length(spans: list[tuple[float, float]]) -> float:
    return sum(end - start for start, end in merge_spans(spans))


def transmit_packet(
    d: float,
    jam_intervals: list[JamInterval],
    p: LinkParams,
    rng: RngStream,
    t_start: float = 0.0,
    link: tuple[str, str] = ("", ""),
) -> PacketAttempt:
    n_bits = p.bits_total
    bit_time = 1.0 / p.bitrate
    t_end = t_start + p.airtime

    eps_bits = np.full(n_bits, base_bit_error_prob(d, p))
    jam_bits = np.zeros(n_bits)
    spans = []
    for start, end, eps_jam in jam_intervals:
        start, end = max(start, t_start), min(end, t_end)
        if end <= start:
            continue
        spans.append((start, end))
        lo = max(math.floor((start - t_start) / bit_time + BIT_EDGE_TOLERANCE), 0)
        hi = min(math.ceil((end - t_start) / bit_time - BIT_EDGE_TOLERANCE), n_bits)
        # strongest interferer wins on bits hit by several intervals
        np.maximum(jam_bits[lo:hi], eps_jam, out=jam_bits[lo:hi])

    eps_bits = np.clip(eps_bits + jam_bits, 0.0, PER_BIT_CEILING)
    errors = rng.uniform_array(n_bits) < eps_bits
    bit_errors = int(np.count_nonzero(errors))

    if errors[: p.shr_bits].any():
        outcome = Outcome.LOST_SYNC
    elif bit_errors:
        outcome = Outcome.RECEIVED_ERRONEOUS
    else:
        outcome = Outcome.DELIVERED

    overlap = min(covered_length(spans) / p.airtime, 1.0) if spans else 0.0
    return PacketAttempt(t_start, link, d, outcome, bit_errors, n_bits, overlap)
