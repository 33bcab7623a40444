"""Project logger: colored console output plus a log file rotated at midnight.

The console shows records from ``$DISSIPNET_LOG_LEVEL`` on (DEBUG if unset),
the file always keeps everything.
"""

import logging
import os
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

import coloredlogs
from verboselogs import VerboseLogger

from dissipnet.config import LOG_BACKUPS, LOG_LEVEL_ENV, LOGFILE, NAME


def console_level() -> str:
    return os.environ.get(LOG_LEVEL_ENV, "DEBUG").upper()


def init_logging(logfile: Path, level: str | None = None) -> VerboseLogger:
    dissipnet_logger = VerboseLogger(NAME)

    coloredlogs.install(level=level or console_level(), milliseconds=True, logger=dissipnet_logger)
    dissipnet_logger.setLevel(logging.DEBUG)

    logfile.parent.mkdir(exist_ok=True, parents=True)
    file_handler = TimedRotatingFileHandler(logfile, when="MIDNIGHT", backupCount=LOG_BACKUPS)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(coloredlogs.DEFAULT_LOG_FORMAT))
    dissipnet_logger.addHandler(file_handler)

    return dissipnet_logger


logger = init_logging(LOGFILE)
