"""Logging configuration for sepvote.

Log records go to stderr; stdout is reserved for command output (reports, predictions, tables).
"""

import logging
import os
import sys

LOG_LEVEL_ENV = "SEPVOTE_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def log_level() -> int:
    """Level named by `SEPVOTE_LOG_LEVEL`, INFO when unset or unknown."""
    level = logging.getLevelName(os.getenv(LOG_LEVEL_ENV, "INFO").strip().upper())
    return level if isinstance(level, int) else logging.INFO


def set_logger(name: str) -> logging.Logger:
    """
    Return the logger `name` with sepvote's console handler attached.

    Repeated calls for the same name reuse the handler configured the first time.

    Args:
        name: Logger name, usually a class name or `__name__`.
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    level = log_level()
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))

    logger.setLevel(level)
    logger.addHandler(handler)
    logger.propagate = False
    return logger
