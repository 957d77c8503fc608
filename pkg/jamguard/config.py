import logging
import os
from enum import IntEnum


class ExitCode(IntEnum):
    SUCCESS = 0
    FAILURE = 1
    INVALID_CONFIG = 2

    def message(self) -> str:
        return {
            ExitCode.SUCCESS: "Success",
            ExitCode.FAILURE: "Failure",
            ExitCode.INVALID_CONFIG: "Invalid configuration",
        }.get(self, "Failure")


class Config:
    SEED_ENV_VAR = "JAMGUARD_SEED"
    DEFAULT_SEED = 0

    DEFAULT_EPOCH_LENGTH = 1.0
    DEFAULT_ATTEMPTS_PER_EPOCH = 50
    DEFAULT_N_MIN = 20
    DEFAULT_Z = 4.0

    DEFAULT_SWEEP_D_MIN = 1.0
    DEFAULT_SWEEP_STEP = 1.0
    DEFAULT_SWEEP_PACKETS = 2000

    DISTANCE_SOURCES = ("ranging", "geometric")
    OUTPUT_FORMATS = ("csv", "json")

    EPOCHS_CSV = "epochs.csv"
    ATTEMPTS_CSV = "attempts.csv"
    JAMMERS_CSV = "jammers.csv"
    REPORT_JSON = "report.json"
    CURVE_CSV = "curve.csv"
    CURVE_META_JSON = "curve.json"
    SWEEP_CSV = "sweep.csv"
    LOG_FILE = "jamguard.log"
    LOCK_FILE = ".jamguard.lock"

    # significant digits for decimals in emitted tables
    FLOAT_DIGITS = 9

    @staticmethod
    def env_seed() -> int | None:
        raw = os.environ.get(Config.SEED_ENV_VAR)
        if raw is None or not raw.strip():
            return None
        try:
            value = int(raw.strip(), 0)
        except ValueError:
            logging.warning("Ignoring non-integer %s=%r", Config.SEED_ENV_VAR, raw)
            return None
        if not 0 <= value < 2**64:
            logging.warning("Ignoring out-of-range %s=%r", Config.SEED_ENV_VAR, raw)
            return None
        return value

    @staticmethod
    def resolve_seed(cli_seed: int | None, config_seed: int | None) -> int:
        for candidate in (cli_seed, config_seed, Config.env_seed()):
            if candidate is not None:
                return candidate
        return Config.DEFAULT_SEED

    @staticmethod
    def log_file_path(out_dir: str) -> str:
        return os.path.join(out_dir, Config.LOG_FILE)

    @staticmethod
    def lockfile_path(out_dir: str) -> str:
        return os.path.join(out_dir, Config.LOCK_FILE)

    @staticmethod
    def sweep_point_dir(out_dir: str, index: int) -> str:
        return os.path.join(out_dir, f"point-{index:03d}")

    @staticmethod
    def ensure_output_dir(out_dir: str) -> None:
        if not os.path.isdir(out_dir):
            os.makedirs(out_dir, exist_ok=True)
            logging.info("Created directory: %s", out_dir)
