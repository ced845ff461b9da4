from __future__ import annotations

import logging
import sys
from pathlib import Path

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

LOG_LEVELS: dict[str, int] = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


def parse_level(level: int | str) -> int:
    """Accept a logging level as an int or a name such as ``"debug"``."""
    if isinstance(level, int):
        return level
    try:
        return LOG_LEVELS[level.upper()]
    except KeyError:
        raise ValueError(f"unknown log level {level!r}, expected one of {sorted(LOG_LEVELS)}") from None


def _same_file(handler: logging.Handler, log_file: Path) -> bool:
    base = getattr(handler, "baseFilename", None)
    return base is not None and Path(base).resolve() == log_file.resolve()


def _is_stdout(handler: logging.Handler) -> bool:
    return (
        isinstance(handler, logging.StreamHandler)
        and not isinstance(handler, logging.FileHandler)
        and getattr(handler, "stream", None) is sys.stdout
    )


def setup_logging(log_file: Path, level: int | str = logging.INFO) -> None:
    """
    Route every ``condcast.*`` logger to ``log_file`` and stdout.

    Safe to call repeatedly: existing handlers for the same file or for stdout
    are reused and only their level is updated.
    """
    level = parse_level(level)
    log_file = Path(log_file)
    log_file.parent.mkdir(parents=True, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT)

    file_handlers = [h for h in root_logger.handlers if _same_file(h, log_file)]
    if not file_handlers:
        handler = logging.FileHandler(log_file, encoding="utf-8")
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)
        file_handlers = [handler]

    console_handlers = [h for h in root_logger.handlers if _is_stdout(h)]
    if not console_handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)
        console_handlers = [handler]

    for handler in file_handlers + console_handlers:
        handler.setLevel(level)

    for logger_name in logging.Logger.manager.loggerDict:
        logger_obj = logging.getLogger(logger_name)
        if logger_obj is not root_logger and logger_name.startswith("condcast"):
            logger_obj.propagate = True
            if logger_obj.level == logging.NOTSET or logger_obj.level > level:
                logger_obj.setLevel(logging.NOTSET)
