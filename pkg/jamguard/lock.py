import contextlib
import errno
import fcntl
import logging
import os
import types
from typing import TextIO

from .config import Config
from .errors import OutputBusyError


class OutputLock:
    def __init__(self, out_dir: str) -> None:
        self.out_dir = out_dir
        self.lock_path = Config.lockfile_path(out_dir)
        self.lock_file: TextIO | None = None
        self.locked = False

    def acquire(self) -> None:
        if self.locked:
            logging.warning("Output directory already locked: %s", self.out_dir)
            return

        Config.ensure_output_dir(self.out_dir)
        self.lock_file = open(self.lock_path, "w")  # noqa: SIM115
        try:
            fcntl.flock(self.lock_file.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as e:
            self.lock_file.close()
            self.lock_file = None
            if e.errno in (errno.EACCES, errno.EAGAIN):
                raise OutputBusyError(
                    f"Another run is writing to {self.out_dir}; pick a different --out"
                ) from e
            raise
        self.locked = True
        logging.debug("Locked output directory: %s", self.out_dir)

    def release(self) -> None:
        if self.locked and self.lock_file:
            fcntl.flock(self.lock_file.fileno(), fcntl.LOCK_UN)
            self.lock_file.close()
            self.lock_file = None
            with contextlib.suppress(FileNotFoundError):
                os.remove(self.lock_path)
            self.locked = False
            logging.debug("Released output directory: %s", self.out_dir)

    def __enter__(self) -> "OutputLock":
        self.acquire()
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: types.TracebackType | None,
    ) -> None:
        self.release()
