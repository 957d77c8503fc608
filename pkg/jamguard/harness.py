import itertools
import logging
import os
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, NamedTuple

from .calibration import ThresholdCurve
from .config import Config
from .errors import ConfigError
from .lock import OutputLock
from .metrics import MetricsReport
from .report import build_report, emit_report, fmt, write_csv, write_json
from .scenario import ScenarioConfig, apply_override, parse_scenario
from .sim import SimTrace, resolve_curve, run_scenario


def run_experiment(
    config: ScenarioConfig,
    seed: int | None = None,
    curve: ThresholdCurve | None = None,
) -> tuple[SimTrace, MetricsReport]:
    run_seed = Config.resolve_seed(seed, config.seed)
    if curve is None:
        curve = resolve_curve(config, run_seed)
    trace = run_scenario(config, run_seed, curve)
    report = build_report(trace)
    logging.info(
        "Run finished (seed %d): FPR=%s TPR=%s",
        run_seed,
        fmt(report.fpr) or "n/a",
        fmt(report.tpr) or "n/a",
    )
    return trace, report


def run_to_dir(
    config: ScenarioConfig,
    out_dir: str,
    seed: int | None = None,
    formats: Sequence[str] = Config.OUTPUT_FORMATS,
) -> MetricsReport:
    with OutputLock(out_dir):
        trace, report = run_experiment(config, seed)
        emit_report(
            trace,
            report,
            out_dir,
            formats,
            curve_from_sweep=config.detector.curve_path is None,
        )
    return report


class SweepPoint(NamedTuple):
    index: int
    params: dict[str, Any]
    raw: dict[str, Any]
    base_dir: str
    out_dir: str
    seed: int | None
    formats: tuple[str, ...]


def expand_grid(grid: dict[str, list[Any]]) -> list[dict[str, Any]]:
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("grid: expected a non-empty object of dotted path -> list of values")
    errors = [
        f"grid.{key}: expected a non-empty list"
        for key, values in grid.items()
        if not isinstance(values, list) or not values
    ]
    if errors:
        raise ConfigError(errors)
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def run_point(point: SweepPoint) -> dict[str, Any]:
    raw = point.raw
    for dotted, value in point.params.items():
        try:
            raw = apply_override(raw, dotted, value)
        except (KeyError, IndexError, ValueError, TypeError) as err:
            raise ConfigError(f"grid.{dotted}: cannot apply to scenario ({err})") from err
    config = parse_scenario(raw, point.base_dir)

    Config.ensure_output_dir(point.out_dir)
    write_json(os.path.join(point.out_dir, "params.json"), point.params)
    report = run_to_dir(config, point.out_dir, point.seed, point.formats)
    overall = report.to_dict()["global"]
    return {
        "point": point.index,
        **{key: point.params[key] for key in sorted(point.params)},
        "fpr": overall["fpr"],
        "tpr": overall["tpr"],
        "median_detection_latency_epochs": overall["median_detection_latency_epochs"],
    }


def run_parameter_sweep(
    raw: dict[str, Any],
    base_dir: str,
    grid: dict[str, list[Any]],
    out_dir: str,
    seed: int | None = None,
    formats: Sequence[str] = Config.OUTPUT_FORMATS,
    jobs: int = 1,
) -> list[dict[str, Any]]:
    combos = expand_grid(grid)
    # fail on a bad base scenario before spawning any work
    parse_scenario(raw, base_dir)

    points = [
        SweepPoint(
            i, params, raw, base_dir, Config.sweep_point_dir(out_dir, i), seed, tuple(formats)
        )
        for i, params in enumerate(combos)
    ]
    logging.info("Running %d sweep points with %d worker(s)", len(points), jobs)

    with OutputLock(out_dir):
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(run_point, points))
        else:
            rows = [run_point(p) for p in points]

        keys = sorted(grid)
        header = ["point", *keys, "fpr", "tpr", "median_detection_latency_epochs"]
        write_csv(
            os.path.join(out_dir, Config.SWEEP_CSV),
            header,
            (
                [
                    row["point"],
                    *(row[k] for k in keys),
                    fmt(row["fpr"]),
                    fmt(row["tpr"]),
                    fmt(row["median_detection_latency_epochs"]),
                ]
                for row in rows
            ),
        )
    return rows
