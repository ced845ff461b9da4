import logging

import pytest

from src.core.logging_utils import parse_level, setup_logging


def test_setup_logging_creates_log_file(tmp_path):
    log_file = tmp_path / "logs" / "app.log"

    setup_logging(log_file, level=logging.DEBUG)
    logging.getLogger("condcast.test").debug("written")

    assert log_file.exists()
    assert "written" in log_file.read_text(encoding="utf-8")


def test_setup_logging_reuses_handlers(tmp_path):
    log_file = tmp_path / "app.log"
    root = logging.getLogger()

    setup_logging(log_file, level="info")
    count = len(root.handlers)
    setup_logging(log_file, level="warning")

    assert len(root.handlers) == count
    assert root.level == logging.WARNING


def test_parse_level():
    assert parse_level("debug") == logging.DEBUG
    assert parse_level(logging.ERROR) == logging.ERROR
    with pytest.raises(ValueError):
        parse_level("loud")
