import logging
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

import pytest
from pyfakefs.fake_filesystem import FakeFilesystem

from dissipnet.config import LOG_LEVEL_ENV
from dissipnet.log import console_level, init_logging


def test_init_logging___logfile_path_does_not_exist__should_be_created(
    fs: FakeFilesystem,
) -> None:
    init_logging(Path("logs/dissipnet.log"))
    assert fs.exists("logs/dissipnet.log")


def test_init_logging__logger__has_verbose_levels(fs: FakeFilesystem) -> None:
    logger = init_logging(Path("logs/dissipnet.log"))
    assert hasattr(logger, "success")
    assert hasattr(logger, "notice")
    assert hasattr(logger, "verbose")


def test_init_logging__explicit_level__console_handler_filters(fs: FakeFilesystem) -> None:
    logger = init_logging(Path("logs/dissipnet.log"), level="WARNING")
    file_handlers = [handler for handler in logger.handlers if isinstance(handler, TimedRotatingFileHandler)]
    console_handlers = [handler for handler in logger.handlers if handler not in file_handlers]
    assert [handler.level for handler in file_handlers] == [logging.DEBUG]
    assert any(handler.level == logging.WARNING for handler in console_handlers)


def test_console_level__environment__upper_case(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(LOG_LEVEL_ENV, "info")
    assert console_level() == "INFO"


def test_console_level__unset__debug(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)
    assert console_level() == "DEBUG"
