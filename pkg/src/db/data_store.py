from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from src.core.config import SETTINGS_FILE
from src.db.config import (
    BenchSettings,
    ConfigBase,
    DataSettings,
    EstimationSettings,
    ForecastSettings,
)

logger = logging.getLogger("condcast.db.data_store")


@dataclass
class RunSettings(ConfigBase):
    """All settings of one invocation, the document passed with ``--config``."""

    log_level: str = "info"
    output_dir: str | None = None
    estimation: EstimationSettings = field(default_factory=EstimationSettings)
    forecast: ForecastSettings = field(default_factory=ForecastSettings)
    bench: BenchSettings = field(default_factory=BenchSettings)
    data: DataSettings = field(default_factory=DataSettings)

    def validate(self) -> None:
        self.estimation.validate()
        self.forecast.validate()
        self.bench.validate()
        self.data.validate()


def get_default_settings_path() -> Path:
    return SETTINGS_FILE


def load_run_settings(config_path: Path | str | None = None) -> RunSettings:
    """Load RunSettings; no path or a missing file gives the defaults."""
    if config_path is None:
        return RunSettings()
    settings = RunSettings.load(config_path)
    logger.info("Loaded settings from %s", config_path)
    return settings


def save_run_settings(settings: RunSettings, config_path: Path | str | None = None) -> bool:
    return settings.save(config_path or get_default_settings_path())
