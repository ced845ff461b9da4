"""FRED-QD style data ingest."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.errors import (
    InsufficientData,
    MissingColumn,
    MissingValue,
    NonPositiveForLog,
    UnknownVariable,
    ValidationError,
)
from src.db.config import SeriesEntry, Transformation

logger = logging.getLogger("condcast.fmt.series")


@dataclass(frozen=True)
class SeriesSpec:
    """One model variable: a CSV column and its transformation."""

    name: str
    mnemonic: str
    transformation: str = Transformation.LOG100

    def __post_init__(self) -> None:
        if not self.mnemonic:
            raise ValidationError("series mnemonic must not be empty")
        if self.transformation not in Transformation.ALL:
            raise ValidationError(
                f"series {self.mnemonic}: transformation must be one of {Transformation.ALL}, "
                f"got {self.transformation!r}"
            )

    def apply(self, raw: pd.Series) -> pd.Series:
        """
        Transform a raw column indexed by quarter.

        Raises:
            NonPositiveForLog: a logged value is not positive
        """
        if self.transformation == Transformation.LEVEL:
            return raw
        bad = raw[raw <= 0.0]
        if not bad.empty:
            raise NonPositiveForLog(
                f"{self.mnemonic}: non-positive value {bad.iloc[0]} at {bad.index[0]}",
                column=self.mnemonic,
                row=str(bad.index[0]),
            )
        logged = 100.0 * np.log(raw)
        if self.transformation == Transformation.LOG100:
            return logged
        return 4.0 * logged.diff()


def _spec(name: str, mnemonic: str, transformation: str = Transformation.LOG100) -> SeriesSpec:
    return SeriesSpec(name, mnemonic, transformation)


_L = Transformation.LEVEL

FRED_QD_SERIES: tuple[SeriesSpec, ...] = (
    _spec("Real GDP", "GDPC1"),
    _spec("Real personal consumption", "PCECC96"),
    _spec("Real residential investment", "PRFIx"),
    _spec("Real non-residential investment", "PNFIx"),
    _spec("Real exports", "EXPGSC1"),
    _spec("Real imports", "IMPGSC1"),
    _spec("Real government spending", "GCEC1"),
    _spec("Real federal government spending", "B823RA3Q086SBEA"),
    _spec("GDP deflator", "GDPCTPI"),
    _spec("PPI all commodities", "PPIACO"),
    _spec("Core PCE price index", "PCEPILFE"),
    _spec("CPI", "CPIAUCSL"),
    _spec("Core CPI", "CPILFESL"),
    _spec("Real hourly compensation", "RCPHBS"),
    _spec("Nonfarm payrolls", "PAYEMS"),
    _spec("Unemployment rate", "UNRATE", _L),
    _spec("Industrial production", "INDPRO"),
    _spec("Capacity utilization", "CUMFNS"),
    _spec("Housing starts", "HOUST"),
    _spec("Real disposable income", "DPIC96"),
    _spec("Consumer sentiment", "UMCSENTx", _L),
    _spec("1-year Treasury yield", "GS1", _L),
    _spec("10-year Treasury yield", "GS10", _L),
    _spec("Aaa corporate yield", "AAA", _L),
    _spec("Baa corporate yield", "BAA", _L),
    _spec("Dollar index", "TWEXAFEGSMTHx"),
    _spec("S&P 500", "S&P 500"),
    _spec("VIX", "VIXCLSx", _L),
    _spec("PCE price index", "PCECTPI"),
    _spec("Real oil price", "OILPRICEx"),
    _spec("Federal funds rate", "FEDFUNDS", _L),
)


def specs_from_settings(entries: Iterable[SeriesEntry]) -> list[SeriesSpec]:
    """Series configured in settings; an empty list means none were configured."""
    return [SeriesSpec(e.name or e.mnemonic, e.mnemonic, e.transformation) for e in entries]


def parse_quarter(value: object) -> pd.Period:
    """
    Quarter from ``2020Q1``, ``2020-Q1`` or any date inside the quarter.

    Raises:
        ValidationError: the value is not a date
    """
    if isinstance(value, pd.Period):
        return value.asfreq("Q")
    text = str(value).strip().replace("-Q", "Q").replace(":Q", "Q")
    try:
        return pd.Period(text, freq="Q")
    except (ValueError, TypeError) as e:
        raise ValidationError(f"not a quarter: {value!r}") from e


def _try_quarter(value: object) -> pd.Period | None:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    try:
        return parse_quarter(value)
    except ValidationError:
        return None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Transformed data, one row per quarter in ascending order."""

    values: np.ndarray
    variables: tuple[str, ...]
    dates: pd.PeriodIndex
    specs: tuple[SeriesSpec, ...] = ()

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def index_of(self, variable: str) -> int:
        try:
            return self.variables.index(variable)
        except ValueError:
            raise UnknownVariable(f"unknown variable {variable!r}") from None

    def history(self, p: int) -> np.ndarray:
        """Last ``p`` observations, oldest first."""
        if p > self.T:
            raise InsufficientData(f"{self.T} observations, {p} lags requested")
        return self.values[self.T - p :]

    def forecast_dates(self, h: int) -> pd.PeriodIndex:
        """The ``h`` quarters after the sample."""
        return pd.period_range(self.dates[-1] + 1, periods=h, freq="Q")

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=self.dates, columns=list(self.variables))


def read_quarterly_csv(csv_path: Path | str) -> pd.DataFrame:
    """
    Raw CSV indexed by quarter; rows whose first cell is not a date are dropped.

    Raises:
        ValidationError: file missing or duplicated quarters
    """
    path = Path(csv_path)
    if not path.is_file():
        raise ValidationError(f"data file not found: {path}")
    raw = pd.read_csv(path, dtype=str)
    if raw.shape[1] < 2:
        raise ValidationError(f"{path}: expected a date column and at least one series")
    quarters = [_try_quarter(v) for v in raw.iloc[:, 0]]
    keep = [q is not None for q in quarters]
    dropped = len(keep) - sum(keep)
    if dropped:
        logger.debug("Dropped %d non-date rows from %s", dropped, path)
    frame = raw.loc[keep].iloc[:, 1:].copy()
    frame.index = pd.PeriodIndex([q for q in quarters if q is not None], freq="Q")
    if frame.index.has_duplicates:
        raise ValidationError(f"{path}: duplicated quarters")
    return frame.sort_index()


def ingest(
    csv_path: Path | str,
    specs: Sequence[SeriesSpec],
    start: str | pd.Period,
    end: str | pd.Period,
) -> Dataset:
    """
    Load and transform the configured series over ``[start, end]``.

    Raises:
        MissingColumn: a mnemonic is not a CSV column
        MissingValue: a value inside the range is missing (row and column reported)
        NonPositiveForLog: a logged series has a non-positive value
        InsufficientData: the range holds no quarter
    """
    if not specs:
        raise ValidationError("no series configured")
    start_q, end_q = parse_quarter(start), parse_quarter(end)
    if end_q < start_q:
        raise ValidationError(f"sample end {end_q} precedes start {start_q}")
    frame = read_quarterly_csv(csv_path)

    columns = {}
    for spec in specs:
        if spec.mnemonic not in frame.columns:
            raise MissingColumn(f"column {spec.mnemonic!r} not in {csv_path}", column=spec.mnemonic)
        # One extra quarter feeds the growth rate of the first row
        raw = pd.to_numeric(frame[spec.mnemonic], errors="coerce").loc[start_q - 1 : end_q]
        columns[spec.mnemonic] = spec.apply(raw).loc[start_q:end_q]

    data = pd.DataFrame(columns)
    if data.empty:
        raise InsufficientData(f"no observations between {start_q} and {end_q}")
    expected = pd.period_range(start_q, end_q, freq="Q")
    gaps = expected.difference(data.index)
    if len(gaps):
        raise MissingValue(f"quarter {gaps[0]} is missing", row=str(gaps[0]), column="date")
    missing = data.isna()
    if missing.to_numpy().any():
        row, col = np.argwhere(missing.to_numpy())[0]
        raise MissingValue(
            f"missing value for {data.columns[col]} at {data.index[row]}",
            row=str(data.index[row]),
            column=str(data.columns[col]),
        )
    return Dataset(
        values=data.to_numpy(dtype=float),
        variables=tuple(s.mnemonic for s in specs),
        dates=data.index,
        specs=tuple(specs),
    )
