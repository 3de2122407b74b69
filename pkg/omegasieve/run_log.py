"""
omegasieve/run_log.py
Logs run events (sieve progress, certified constants, verification rows).
"""

import logging
import os
import sys
from pathlib import Path

LOG_DIR = Path(os.environ.get("OMEGASIEVE_LOG_DIR", Path.home() / ".omegasieve"))
LOG_PATH = LOG_DIR / "omegasieve.log"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"


def setup_logger() -> logging.Logger:
    logger = logging.getLogger("omegasieve")
    logger.setLevel(logging.INFO)

    if not logger.handlers:
        try:
            LOG_PATH.parent.mkdir(parents=True, exist_ok=True)
            fh = logging.FileHandler(LOG_PATH, encoding="utf-8")
        except OSError:
            # read-only home: keep the library silent rather than failing on import
            logger.addHandler(logging.NullHandler())
            return logger
        fh.setLevel(logging.INFO)
        fh.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(fh)

    return logger


_logger = setup_logger()


def enable_console(level: int = logging.INFO):
    """Mirror log lines to stderr (the CLI's --verbose)."""
    for handler in _logger.handlers:
        if getattr(handler, "_omegasieve_console", False):
            return
    sh = logging.StreamHandler(sys.stderr)
    sh.setLevel(level)
    sh.setFormatter(logging.Formatter(LOG_FORMAT))
    sh._omegasieve_console = True
    _logger.addHandler(sh)


def _render(event: str, details: str) -> str:
    return f"{event}" + (f" | {details}" if details else "")


def log_event(event: str, details: str = ""):
    _logger.info(_render(event, details))


def log_warning(event: str, details: str = ""):
    _logger.warning(_render(event, details))


def log_failure(event: str, details: str = ""):
    _logger.error(_render(event, details))
