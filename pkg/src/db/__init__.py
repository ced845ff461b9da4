from src.db.config import (
    BenchConfig,
    BenchSettings,
    ConfigBase,
    DataSettings,
    EstimationSettings,
    ForecastSettings,
    PriorChoice,
    SeriesEntry,
    Transformation,
)
from src.db.data_store import (
    RunSettings,
    get_default_settings_path,
    load_run_settings,
    save_run_settings,
)

__all__ = [
    "BenchConfig",
    "BenchSettings",
    "ConfigBase",
    "DataSettings",
    "EstimationSettings",
    "ForecastSettings",
    "PriorChoice",
    "RunSettings",
    "SeriesEntry",
    "Transformation",
    "get_default_settings_path",
    "load_run_settings",
    "save_run_settings",
]
