import argparse
import json
import logging
import os
from collections.abc import Sequence

from . import __version__
from .calibration import save_curve
from .config import Config, ExitCode
from .errors import ConfigError, JamguardError
from .harness import run_parameter_sweep, run_to_dir
from .lock import OutputLock
from .report import report_from_csv
from .scenario import load_scenario, read_scenario_json
from .sim import resolve_curve


def setup_logging(out_dir: str, quiet: bool = False, verbose: bool = False) -> None:
    os.makedirs(out_dir, exist_ok=True)
    log_path = Config.log_file_path(out_dir)

    if os.path.isfile(log_path):
        os.remove(log_path)

    handlers: list[logging.Handler] = []
    log_format = "%(asctime)s %(levelname)s: %(message)s"

    file_handler = logging.FileHandler(log_path, mode="a", encoding="utf-8")
    file_handler.setFormatter(logging.Formatter(log_format))
    handlers.append(file_handler)

    if not quiet:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter(log_format))
        handlers.append(console_handler)

    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, handlers=handlers, force=True)
    logging.info("Initialised logging and created log file: %s", log_path)


def report_and_exit(code: ExitCode, message: str | None = None, *, level: str = "error") -> int:
    getattr(logging, level)(message or code.message())
    return int(code)


def seed_arg(raw: str) -> int:
    try:
        value = int(raw, 0)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"invalid seed {raw!r}") from err
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {raw}")
    return value


def formats_arg(raw: str) -> tuple[str, ...]:
    formats = tuple(f.strip() for f in raw.split(",") if f.strip())
    unknown = [f for f in formats if f not in Config.OUTPUT_FORMATS]
    if unknown or not formats:
        raise argparse.ArgumentTypeError(
            f"--format takes a comma list of {','.join(Config.OUTPUT_FORMATS)}, got {raw!r}"
        )
    return formats


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamguard",
        description="IR-UWB ranging jamming detection simulator",
        epilog=f"""
    The seed is taken from --seed, then the scenario's "seed" key, then the
    {Config.SEED_ENV_VAR} environment variable, and finally defaults to {Config.DEFAULT_SEED}.

    Defaults: epoch length {Config.DEFAULT_EPOCH_LENGTH} s, {Config.DEFAULT_ATTEMPTS_PER_EPOCH}
    ranging attempts per epoch, n_min {Config.DEFAULT_N_MIN} sent packets per verdict,
    threshold margin z={Config.DEFAULT_Z} with n_runtime equal to the attempts per epoch.

    STATUS CODES:
      0   Success
      1   Failure (runtime or I/O error)
      2   Invalid configuration

    Detection verdicts never change the status code.
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
        help="Show the version and exit",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", default=".", help="Output directory (default: .)")
    common.add_argument("--quiet", action="store_true", help="Log to the log file only")
    common.add_argument("--verbose", action="store_true", help="Log per-epoch verdicts")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--config", metavar="PATH", required=True, help="Scenario JSON file")
    scenario.add_argument(
        "--seed",
        metavar="U64",
        type=seed_arg,
        help=f"Run seed, overrides the scenario and {Config.SEED_ENV_VAR}",
    )

    formats = argparse.ArgumentParser(add_help=False)
    formats.add_argument(
        "--format",
        metavar="LIST",
        type=formats_arg,
        default=Config.OUTPUT_FORMATS,
        help="Comma separated output formats: csv,json (default: csv,json)",
    )

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(
        "calibrate",
        parents=[common, scenario],
        help="Run the attack-free sweep and write curve.csv with its curve.json sidecar",
    )
    sub.add_parser(
        "run",
        parents=[common, scenario, formats],
        help="Simulate a scenario and write epochs.csv, attempts.csv and report.json",
    )
    sweep = sub.add_parser(
        "sweep",
        parents=[common, scenario, formats],
        help="Run a scenario over a parameter grid, one subdirectory per point",
    )
    sweep.add_argument(
        "--grid",
        metavar="PATH",
        required=True,
        help='JSON object of dotted config paths to value lists, e.g. {"detector.z": [2, 4]}',
    )
    sweep.add_argument("--jobs", metavar="N", type=int, default=1, help="Parallel workers")
    report = sub.add_parser(
        "report",
        parents=[common],
        help="Recompute report.json from an existing epochs.csv",
    )
    report.add_argument(
        "--epochs",
        metavar="PATH",
        help="epochs.csv to aggregate (default: <out>/epochs.csv)",
    )
    return parser


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    if config.detector.curve_path is not None:
        return report_and_exit(
            ExitCode.INVALID_CONFIG,
            "detector.curve: calibrate needs sweep settings, not a curve file",
        )
    seed = Config.resolve_seed(args.seed, config.seed)
    with OutputLock(args.out):
        curve = resolve_curve(config, seed)
        save_curve(curve, os.path.join(args.out, Config.CURVE_CSV))
    return int(ExitCode.SUCCESS)


def cmd_run(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    run_to_dir(config, args.out, args.seed, args.format)
    return int(ExitCode.SUCCESS)


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        return report_and_exit(ExitCode.INVALID_CONFIG, "--jobs must be >= 1")
    raw = read_scenario_json(args.config)
    grid = read_scenario_json(args.grid)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    rows = run_parameter_sweep(raw, base_dir, grid, args.out, args.seed, args.format, args.jobs)
    logging.info("Sweep finished: %d points in %s", len(rows), args.out)
    return int(ExitCode.SUCCESS)


def cmd_report(args: argparse.Namespace) -> int:
    epochs = args.epochs or os.path.join(args.out, Config.EPOCHS_CSV)
    if not os.path.isfile(epochs):
        return report_and_exit(ExitCode.FAILURE, f"The file does not exist: {epochs}")
    report = report_from_csv(epochs, os.path.join(args.out, Config.REPORT_JSON))
    logging.info("Report: %s", json.dumps(report.to_dict()["global"], sort_keys=True))
    return int(ExitCode.SUCCESS)


COMMANDS = {
    "calibrate": cmd_calibrate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.out, args.quiet, args.verbose)
    except OSError as err:
        return report_and_exit(
            ExitCode.FAILURE, f"Cannot write to the output directory {args.out}: {err}"
        )

    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        for message in err.errors:
            logging.error("%s", message)
        return report_and_exit(ExitCode.INVALID_CONFIG)
    except (JamguardError, OSError, ValueError) as err:
        return report_and_exit(ExitCode.FAILURE, str(err))


if __name__ == "__main__":
    raise SystemExit(main())
