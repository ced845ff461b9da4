from src.fmt.output import (
    difference_table,
    irf_table,
    quantile_column,
    quantile_table,
    summary_table,
    write_draws,
    write_table,
)
from src.fmt.scenario import (
    BandEntry,
    EqualityEntry,
    InequalityEntry,
    ScenarioFile,
    ShockEntry,
    dump_scenario,
    parse_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from src.fmt.series import (
    FRED_QD_SERIES,
    Dataset,
    SeriesSpec,
    ingest,
    parse_quarter,
    read_quarterly_csv,
    specs_from_settings,
)

__all__ = [
    "FRED_QD_SERIES",
    "BandEntry",
    "Dataset",
    "EqualityEntry",
    "InequalityEntry",
    "ScenarioFile",
    "SeriesSpec",
    "ShockEntry",
    "difference_table",
    "dump_scenario",
    "ingest",
    "irf_table",
    "parse_quarter",
    "parse_scenario",
    "quantile_column",
    "quantile_table",
    "read_quarterly_csv",
    "scenario_from_dict",
    "scenario_to_dict",
    "specs_from_settings",
    "summary_table",
    "write_draws",
    "write_table",
]
