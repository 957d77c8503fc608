import statistics
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple

JAMMING = "Jamming"
INSUFFICIENT = "Insufficient"


class EpochOutcome(NamedTuple):
    epoch: int
    link: str
    verdict: str
    truth: bool


@dataclass
class LinkMetrics:
    link: str
    epochs_total: int = 0
    truth_positive_epochs: int = 0
    detections: int = 0
    true_positives: int = 0
    false_positives: int = 0
    binary_negatives: int = 0
    binary_positives: int = 0
    insufficient_count: int = 0
    activations: int = 0
    detection_latency_epochs: list[int | None] = field(default_factory=list)

    @property
    def fpr(self) -> float | None:
        return self.false_positives / self.binary_negatives if self.binary_negatives else None

    @property
    def tpr(self) -> float | None:
        return self.true_positives / self.binary_positives if self.binary_positives else None

    @property
    def median_latency(self) -> float | None:
        return median_latency(self.detection_latency_epochs)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out.update(
            fpr=self.fpr,
            tpr=self.tpr,
            median_detection_latency_epochs=self.median_latency,
        )
        return out


def median_latency(latencies: list[int | None]) -> float | None:
    found = [lat for lat in latencies if lat is not None]
    return float(statistics.median(found)) if found else None


@dataclass
class MetricsReport:
    links: dict[str, LinkMetrics]

    def total(self, name: str) -> int:
        return sum(int(getattr(m, name)) for m in self.links.values())

    @property
    def fpr(self) -> float | None:
        negatives = self.total("binary_negatives")
        return self.total("false_positives") / negatives if negatives else None

    @property
    def tpr(self) -> float | None:
        positives = self.total("binary_positives")
        return self.total("true_positives") / positives if positives else None

    @property
    def latencies(self) -> list[int | None]:
        return [lat for m in self.links.values() for lat in m.detection_latency_epochs]

    def to_dict(self) -> dict[str, Any]:
        counters = (
            "epochs_total",
            "truth_positive_epochs",
            "detections",
            "true_positives",
            "false_positives",
            "binary_negatives",
            "binary_positives",
            "insufficient_count",
            "activations",
        )
        detected = [lat for lat in self.latencies if lat is not None]
        overall: dict[str, Any] = {name: self.total(name) for name in counters}
        overall.update(
            fpr=self.fpr,
            tpr=self.tpr,
            detected_activations=len(detected),
            median_detection_latency_epochs=median_latency(self.latencies),
        )
        return {
            "global": overall,
            "links": {name: m.to_dict() for name, m in sorted(self.links.items())},
        }


def aggregate(rows: Iterable[EpochOutcome]) -> MetricsReport:
    by_link: dict[str, list[EpochOutcome]] = {}
    for row in rows:
        by_link.setdefault(row.link, []).append(row)

    report = MetricsReport(links={})
    for link, link_rows in by_link.items():
        link_rows.sort(key=lambda r: r.epoch)
        m = LinkMetrics(link)
        for row in link_rows:
            m.epochs_total += 1
            m.truth_positive_epochs += row.truth
            jammed = row.verdict == JAMMING
            m.detections += jammed
            if row.verdict == INSUFFICIENT:
                m.insufficient_count += 1
            elif row.truth:
                m.binary_positives += 1
                m.true_positives += jammed
            else:
                m.binary_negatives += 1
                m.false_positives += jammed

        m.detection_latency_epochs = activation_latencies(link_rows)
        m.activations = len(m.detection_latency_epochs)
        report.links[link] = m
    return report


def activation_latencies(rows: list[EpochOutcome]) -> list[int | None]:
    """Epochs from each rising edge of the ground truth to the first Jamming
    verdict within the same attacked stretch; None when it was never detected."""
    latencies: list[int | None] = []
    pending: int | None = None
    in_stretch = False
    prev_epoch: int | None = None
    for row in rows:
        contiguous = prev_epoch is not None and row.epoch == prev_epoch + 1
        if row.truth and not (in_stretch and contiguous):
            if pending is not None:
                latencies.append(None)
            pending = row.epoch
            in_stretch = True
        elif not row.truth:
            if pending is not None:
                latencies.append(None)
            pending = None
            in_stretch = False
        if pending is not None and row.verdict == JAMMING:
            latencies.append(row.epoch - pending)
            pending = None
        prev_epoch = row.epoch
    if pending is not None:
        latencies.append(None)
    return latencies
