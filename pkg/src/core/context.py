from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING

from src.core.config import DEFAULT_OUTPUT_DIR
from src.core.errors import ValidationError

if TYPE_CHECKING:
    from src.db.data_store import RunSettings
    from src.fmt.series import Dataset

logger = logging.getLogger("condcast.core.context")


class RunContext:
    """
    State of one command-line invocation.

    Holds the settings, the output directory and the ingested dataset; the
    settings file and the data are read on first access.
    """

    def __init__(
        self,
        output_dir: Path | None = None,
        settings: RunSettings | None = None,
        config_path: Path | None = None,
    ):
        self._output_dir = Path(output_dir) if output_dir is not None else None
        self._settings: RunSettings | None = settings
        self._config_path = config_path
        self._data: Dataset | None = None

    @property
    def config_path(self) -> Path | None:
        return self._config_path

    @property
    def settings(self) -> RunSettings:
        """Run settings (lazy loading)."""
        if self._settings is None:
            from src.db.data_store import load_run_settings

            self._settings = load_run_settings(self._config_path)
        return self._settings

    @property
    def output_dir(self) -> Path:
        """Output directory, created on first access."""
        if self._output_dir is None:
            configured = self.settings.output_dir
            self._output_dir = Path(configured) if configured else DEFAULT_OUTPUT_DIR
        self._output_dir.mkdir(parents=True, exist_ok=True)
        return self._output_dir

    def output_path(self, name: str) -> Path:
        return self.output_dir / name

    @property
    def data(self) -> Dataset:
        """
        Dataset described by ``settings.data`` (lazy loading).

        Raises:
            ValidationError: no data path or no date range configured
        """
        if self._data is None:
            from src.fmt.series import FRED_QD_SERIES, ingest, specs_from_settings

            data_settings = self.settings.data
            if not data_settings.path:
                raise ValidationError("no data file configured (--data)")
            if not (data_settings.start and data_settings.end):
                raise ValidationError("estimation sample needs explicit --start and --end")
            specs = specs_from_settings(data_settings.series) or list(FRED_QD_SERIES)
            self._data = ingest(
                Path(data_settings.path), specs, data_settings.start, data_settings.end
            )
            logger.info(
                "Ingested %d quarters x %d series from %s",
                self._data.T,
                self._data.n,
                data_settings.path,
            )
        return self._data

    def set_data(self, data: Dataset) -> None:
        self._data = data

    def save_settings(self) -> bool:
        """Write the effective settings next to the outputs."""
        return self.settings.save(self.output_path("settings.json"))


_context: RunContext | None = None


def get_context() -> RunContext:
    """
    Get the process-wide run context.
    Creates a context with default settings if not initialized.
    """
    global _context
    if _context is None:
        _context = RunContext()
    return _context


def init_context(
    output_dir: Path | None = None,
    settings: RunSettings | None = None,
    config_path: Path | None = None,
) -> RunContext:
    """Initialize the process-wide run context, once per invocation."""
    global _context
    _context = RunContext(output_dir=output_dir, settings=settings, config_path=config_path)
    return _context


def reset_context() -> None:
    """Reset context (for tests)."""
    global _context
    _context = None
