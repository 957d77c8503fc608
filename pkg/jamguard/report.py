import csv
import json
import logging
import os
from collections.abc import Iterable, Sequence
from typing import Any

from .calibration import save_curve
from .config import Config
from .metrics import EpochOutcome, MetricsReport, aggregate
from .sim import SimTrace

EPOCH_COLUMNS = (
    "epoch",
    "t_s",
    "link",
    "d_m",
    "pdr",
    "ber",
    "bpr",
    "psr",
    "thr",
    "verdict",
    "truth",
    "n_sent",
)
ATTEMPT_COLUMNS = ("t_s", "link", "d_m", "outcome", "bit_errors", "bits_total", "jam_overlap")
JAMMER_COLUMNS = ("jammer", "kind", "node", "on_time_s", "duty")


def fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.{Config.FLOAT_DIGITS}g}"


def fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def link_name(link: tuple[str, str]) -> str:
    return f"{link[0]}->{link[1]}"


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as err:
        raise OSError(err.errno, f"Failed to write {path}: {err.strerror}", path) from err
    logging.info("Wrote %s", path)


def write_json(path: str, data: Any) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, indent=4, sort_keys=True)
            f.write("\n")
    except OSError as err:
        raise OSError(err.errno, f"Failed to write {path}: {err.strerror}", path) from err
    logging.info("Wrote %s", path)


def epoch_table(trace: SimTrace) -> list[tuple[str, ...]]:
    rows = []
    for row in trace.epochs:
        w, rec = row.stats, row.verdict
        rows.append(
            (
                str(rec.epoch_index),
                fmt(row.t_s),
                link_name(rec.link),
                fmt(rec.d_used),
                fmt(w.pdr),
                fmt(w.ber),
                fmt(w.bpr),
                fmt(w.psr),
                fmt(rec.thr),
                rec.verdict.value,
                fmt_bool(rec.truth),
                str(w.sent),
            )
        )
    return rows


def epoch_outcomes(trace: SimTrace) -> list[EpochOutcome]:
    return [
        EpochOutcome(r.epoch_index, link_name(r.link), r.verdict.value, r.truth)
        for r in trace.verdicts
    ]


def build_report(trace: SimTrace) -> MetricsReport:
    return aggregate(epoch_outcomes(trace))


def emit_report(
    trace: SimTrace,
    report: MetricsReport,
    out_dir: str,
    formats: Sequence[str] = Config.OUTPUT_FORMATS,
    curve_from_sweep: bool = False,
) -> list[str]:
    if not os.path.isdir(out_dir):
        raise OSError(f"Output directory does not exist: {out_dir}")

    written = []
    if "csv" in formats:
        path = os.path.join(out_dir, Config.EPOCHS_CSV)
        write_csv(path, EPOCH_COLUMNS, epoch_table(trace))
        written.append(path)

        path = os.path.join(out_dir, Config.ATTEMPTS_CSV)
        write_csv(
            path,
            ATTEMPT_COLUMNS,
            (
                (
                    fmt(a.t_start),
                    link_name(a.link),
                    fmt(a.d),
                    a.outcome.value,
                    a.bit_errors,
                    a.bits_total,
                    fmt(a.jam_overlap),
                )
                for a in trace.attempts
            ),
        )
        written.append(path)

        path = os.path.join(out_dir, Config.JAMMERS_CSV)
        write_csv(
            path,
            JAMMER_COLUMNS,
            ((j.name, j.kind, j.node, fmt(j.on_time_s), fmt(j.duty)) for j in trace.jammers),
        )
        written.append(path)

        if curve_from_sweep:
            path = os.path.join(out_dir, Config.CURVE_CSV)
            written.extend([path, save_curve(trace.curve, path)])

    if "json" in formats:
        path = os.path.join(out_dir, Config.REPORT_JSON)
        write_json(path, report.to_dict())
        written.append(path)
    return written


def parse_bool(raw: str) -> bool:
    if raw not in ("true", "false"):
        raise ValueError(f"expected true/false, got {raw!r}")
    return raw == "true"


def read_epoch_outcomes(path: str) -> list[EpochOutcome]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != EPOCH_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            EpochOutcome(int(row["epoch"]), row["link"], row["verdict"], parse_bool(row["truth"]))
            for row in reader
        ]


def report_from_csv(epochs_csv: str, out_path: str | None = None) -> MetricsReport:
    report = aggregate(read_epoch_outcomes(epochs_csv))
    if out_path is not None:
        write_json(out_path, report.to_dict())
    return report
