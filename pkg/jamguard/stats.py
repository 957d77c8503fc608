import math
from dataclasses import dataclass

from .errors import ContractError
from .link import Outcome, PacketAttempt


@dataclass
class WindowStats:
    epoch_index: int
    intended: int = 0
    sent: int = 0
    received_any: int = 0
    erroneous: int = 0
    delivered: int = 0
    bit_errors: int = 0
    bits_transferred: int = 0

    @property
    def pdr(self) -> float | None:
        return pdr(self)

    @property
    def ber(self) -> float | None:
        return ber(self)

    @property
    def bpr(self) -> float | None:
        return bpr(self)

    @property
    def psr(self) -> float | None:
        return psr(self)


def ratio(numerator: int, denominator: int) -> float | None:
    if denominator == 0:
        return None
    return numerator / denominator


def epoch_of(t: float, epoch_length: float) -> int:
    # epoch starts are computed as index * epoch_length, which may round low
    return math.floor(t / epoch_length + 1e-9)


def record(
    attempt: PacketAttempt, w: WindowStats, epoch_length: float | None = None
) -> WindowStats:
    if epoch_length is not None and epoch_of(attempt.t_start, epoch_length) != w.epoch_index:
        raise ContractError(
            f"attempt at t={attempt.t_start} belongs to epoch "
            f"{epoch_of(attempt.t_start, epoch_length)}, window is epoch {w.epoch_index}"
        )
    w.intended += 1
    if attempt.outcome is Outcome.NOT_SENT:
        return w
    w.sent += 1
    w.bit_errors += attempt.bit_errors
    w.bits_transferred += attempt.bits_total
    if attempt.outcome is Outcome.RECEIVED_ERRONEOUS:
        w.received_any += 1
        w.erroneous += 1
    elif attempt.outcome is Outcome.DELIVERED:
        w.received_any += 1
        w.delivered += 1
    return w


def pdr(w: WindowStats) -> float | None:
    return ratio(w.delivered, w.sent)


def ber(w: WindowStats) -> float | None:
    return ratio(w.bit_errors, w.bits_transferred)


def bpr(w: WindowStats) -> float | None:
    return ratio(w.erroneous, w.received_any)


def psr(w: WindowStats) -> float | None:
    return ratio(w.sent, w.intended)


def merge(a: WindowStats, b: WindowStats) -> WindowStats:
    return WindowStats(
        epoch_index=min(a.epoch_index, b.epoch_index),
        intended=a.intended + b.intended,
        sent=a.sent + b.sent,
        received_any=a.received_any + b.received_any,
        erroneous=a.erroneous + b.erroneous,
        delivered=a.delivered + b.delivered,
        bit_errors=a.bit_errors + b.bit_errors,
        bits_transferred=a.bits_transferred + b.bits_transferred,
    )
