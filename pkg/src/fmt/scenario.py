"""
Scenario files: YAML grids of equality, inequality and shock conditions.

Grammar (every block optional, an empty file is the unconditional forecast)::

    start: 2020Q1          # first forecast quarter, horizon 1
    horizon: 13
    equality:
      - {variable: UNRATE, date: 2020Q1, value: 3.60}
    inequality:
      - {variable: CPIAUCSL, date: 2020Q1, lower: 1.69, upper: 2.71}
      - {variable: GS10, date: 2020Q2, lower: 0.0}     # open upper bound
    bands:                 # centre +- half-width; the last width is frozen
      - variable: CPIAUCSL
        centers: {2020Q1: 2.20, 2020Q2: 2.10}
        half_widths: [0.51, 0.55]
    shocks:                # standardised structural shocks, independent rows
      - {variable: FEDFUNDS, date: 2020Q1, mean: 0.0, variance: 0.0}
    nondriving: [GDPC1]    # these shocks keep N(0, 1) at every date
    estimation: {prior: acp, lags: 4, draws: 1000, burn_in: 0, seed: 7}

A cell ``(variable, date)`` maps to the stacked coordinate
``variable_index + n * (horizon - 1)``.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

from src.cond.constraints import ConstraintSet, EqualityRows, InequalityRows, ShockRows
from src.core.errors import (
    DateOutsideHorizon,
    InvalidBounds,
    OverlapEqualityInequality,
    ScenarioFormatError,
    UnknownVariable,
    ValidationError,
)
from src.db.config import EstimationSettings
from src.fmt.series import parse_quarter
from src.linalg.selection import SelectionMatrix

logger = logging.getLogger("condcast.fmt.scenario")

TOP_LEVEL_KEYS = (
    "start",
    "horizon",
    "equality",
    "inequality",
    "bands",
    "shocks",
    "nondriving",
    "estimation",
)
ESTIMATION_KEYS = tuple(f.name for f in fields(EstimationSettings))


@dataclass(frozen=True)
class EqualityEntry:
    variable: str
    date: pd.Period
    value: float


@dataclass(frozen=True)
class InequalityEntry:
    variable: str
    date: pd.Period
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise InvalidBounds(
                f"{self.variable} {self.date}: lower {self.lower} is not below upper {self.upper}"
            )


@dataclass(frozen=True)
class BandEntry:
    """
    Intervals ``center +- half_width`` over contiguous quarters.

    ``half_widths`` may be shorter than ``centers``; the last width then holds
    for the remaining quarters.

    Widths are matched to quarters by position, so the quarters must be
    contiguous. Equality, inequality and shock rows name their own date and may
    skip quarters; the selection then covers only the listed cells.
    """

    variable: str
    centers: tuple[tuple[pd.Period, float], ...]
    half_widths: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.centers:
            raise ScenarioFormatError(f"band for {self.variable} has no centers")
        if not self.half_widths:
            raise ScenarioFormatError(f"band for {self.variable} has no half_widths")
        if len(self.half_widths) > len(self.centers):
            raise ScenarioFormatError(
                f"band for {self.variable}: {len(self.half_widths)} widths for "
                f"{len(self.centers)} quarters"
            )
        if any(w <= 0.0 for w in self.half_widths):
            raise InvalidBounds(f"band for {self.variable}: half-widths must be positive")
        dates = [d for d, _ in self.centers]
        for prev, cur in zip(dates, dates[1:]):
            if cur != prev + 1:
                raise ScenarioFormatError(
                    f"band for {self.variable}: quarters must be contiguous, {prev} then {cur}"
                )

    def expand(self) -> list[InequalityEntry]:
        widths = list(self.half_widths)
        widths += [widths[-1]] * (len(self.centers) - len(widths))
        return [
            InequalityEntry(self.variable, date, center - w, center + w)
            for (date, center), w in zip(self.centers, widths)
        ]


@dataclass(frozen=True)
class ShockEntry:
    variable: str
    date: pd.Period
    mean: float = 0.0
    variance: float = 0.0

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise ValidationError(f"shock {self.variable} {self.date}: negative variance")


@dataclass
class ScenarioFile:
    """Parsed scenario file; variables are named by mnemonic."""

    start: pd.Period | None = None
    horizon: int | None = None
    equality: list[EqualityEntry] = field(default_factory=list)
    inequality: list[InequalityEntry] = field(default_factory=list)
    bands: list[BandEntry] = field(default_factory=list)
    shocks: list[ShockEntry] = field(default_factory=list)
    nondriving: list[str] = field(default_factory=list)
    estimation: dict[str, Any] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not (self.equality or self.inequality or self.bands or self.shocks or self.nondriving)

    def inequality_rows(self) -> list[InequalityEntry]:
        """Explicit inequality rows followed by the expanded bands."""
        rows = list(self.inequality)
        for band in self.bands:
            rows.extend(band.expand())
        return rows

    def dates(self) -> list[pd.Period]:
        dates = [e.date for e in self.equality]
        dates += [e.date for e in self.inequality_rows()]
        dates += [e.date for e in self.shocks]
        return sorted(set(dates))

    def horizon_for(self, start: pd.Period, default: int | None = None) -> int:
        """
        Forecast horizon: the explicit ``horizon``, else ``default``, else the
        last referenced quarter.
        """
        if self.horizon is not None:
            return self.horizon
        if default is not None:
            return default
        dates = self.dates()
        return max(1, (dates[-1] - start).n + 1) if dates else 1

    def apply_estimation(self, settings: EstimationSettings) -> EstimationSettings:
        """Copy of ``settings`` overridden by the ``estimation`` block."""
        result = settings.copy()
        if self.estimation:
            result.update(**self.estimation)
            result.validate()
        return result

    def to_constraints(
        self, variables: Sequence[str], start: pd.Period | None = None, h: int | None = None
    ) -> ConstraintSet:
        """
        Constraint set in stacked coordinates, rows sorted by coordinate.

        Raises:
            ValidationError: no forecast start known
            UnknownVariable: a row names a variable outside ``variables``
            DateOutsideHorizon: a row falls outside quarters ``1..h``
            OverlapEqualityInequality: a cell is both fixed and bounded
        """
        if self.is_empty():
            return ConstraintSet()
        start = start if start is not None else self.start
        if start is None:
            raise ValidationError("scenario has no start quarter")
        if self.start is not None and start != self.start:
            raise DateOutsideHorizon(f"scenario starts at {self.start}, forecast starts at {start}")
        h = h if h is not None else self.horizon_for(start)
        n = len(variables)
        nh = n * h
        position = {name: i for i, name in enumerate(variables)}

        def coordinate(variable: str, date: pd.Period) -> int:
            if variable not in position:
                raise UnknownVariable(f"unknown variable {variable!r}")
            k = (date - start).n + 1
            if not 1 <= k <= h:
                raise DateOutsideHorizon(f"{variable} {date} is outside {start}..{start + h - 1}")
            return position[variable] + n * (k - 1)

        def unique(cells: list[int], block: str) -> np.ndarray:
            idx = np.asarray(cells, dtype=int)
            if np.unique(idx).size != idx.size:
                raise ScenarioFormatError(f"duplicated cell in the {block} block")
            return np.argsort(idx, kind="stable")

        equality = None
        if self.equality:
            cells = [coordinate(e.variable, e.date) for e in self.equality]
            order = unique(cells, "equality")
            values = np.array([self.equality[i].value for i in order])
            sel = SelectionMatrix.from_indices(np.asarray(cells)[order], nh)
            equality = EqualityRows(sel, values)

        inequality = None
        rows = self.inequality_rows()
        if rows:
            cells = [coordinate(e.variable, e.date) for e in rows]
            order = unique(cells, "inequality")
            sel = SelectionMatrix.from_indices(np.asarray(cells)[order], nh)
            inequality = InequalityRows(
                sel,
                np.array([rows[i].lower for i in order]),
                np.array([rows[i].upper for i in order]),
            )

        if equality is not None and inequality is not None:
            both = np.intersect1d(equality.selection.indices, inequality.selection.indices)
            if both.size:
                names = [f"{variables[i % n]} {start + i // n}" for i in both]
                raise OverlapEqualityInequality(f"cells {names} are both fixed and bounded")

        shocks = None
        if self.shocks:
            cells = [coordinate(e.variable, e.date) for e in self.shocks]
            order = unique(cells, "shocks")
            shocks = ShockRows(
                SelectionMatrix.from_indices(np.asarray(cells)[order], nh),
                np.array([self.shocks[i].mean for i in order]),
                np.diag([self.shocks[i].variance for i in order]),
            )

        nondriving = None
        if self.nondriving:
            for name in self.nondriving:
                if name not in position:
                    raise UnknownVariable(f"unknown variable {name!r}")
            cells = sorted(position[name] + n * k for name in set(self.nondriving) for k in range(h))
            nondriving = SelectionMatrix.from_indices(cells, nh)

        constraints = ConstraintSet(
            equality=equality, inequality=inequality, shocks=shocks, scenario_nondriving=nondriving
        )
        logger.debug("Scenario maps to %d rows (kind=%s)", constraints.n_rows(), constraints.kind())
        return constraints


def _quarter(value: Any, where: str) -> pd.Period:
    try:
        return parse_quarter(value)
    except ValidationError as e:
        raise ScenarioFormatError(f"{where}: {e}") from e


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise ScenarioFormatError(f"{where}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise ScenarioFormatError(f"{where}: expected a number, got {value!r}") from e


def _bound(value: Any, where: str, open_end: float) -> float:
    # null leaves the side open
    return open_end if value is None else _number(value, where)


def _dump_bound(value: float) -> float | None:
    return float(value) if np.isfinite(value) else None


def _rows(doc: dict[str, Any], key: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    rows = doc.get(key) or []
    if not isinstance(rows, list):
        raise ScenarioFormatError(f"'{key}' must be a list")
    for i, row in enumerate(rows):
        where = f"{key}[{i}]"
        if not isinstance(row, dict):
            raise ScenarioFormatError(f"{where} must be a mapping")
        missing = [k for k in required if k not in row]
        if missing:
            raise ScenarioFormatError(f"{where}: missing {missing}")
        extra = sorted(set(row) - set(required) - set(optional))
        if extra:
            raise ScenarioFormatError(f"{where}: unknown keys {extra}")
        yield where, row


def scenario_from_dict(doc: dict[str, Any] | None) -> ScenarioFile:
    """
    Build a ``ScenarioFile`` from a loaded YAML document.

    Raises:
        ScenarioFormatError: structure or value types do not follow the grammar
    """
    if doc is None:
        return ScenarioFile()
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario must be a mapping")
    extra = sorted(set(doc) - set(TOP_LEVEL_KEYS))
    if extra:
        raise ScenarioFormatError(f"unknown top-level keys {extra}")

    scenario = ScenarioFile()
    if doc.get("start") is not None:
        scenario.start = _quarter(doc["start"], "start")
    if doc.get("horizon") is not None:
        horizon = doc["horizon"]
        if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
            raise ScenarioFormatError(f"horizon must be a positive integer, got {horizon!r}")
        scenario.horizon = horizon

    for where, row in _rows(doc, "equality", ("variable", "date", "value")):
        scenario.equality.append(
            EqualityEntry(
                str(row["variable"]), _quarter(row["date"], where), _number(row["value"], where)
            )
        )
    for where, row in _rows(doc, "inequality", ("variable", "date"), ("lower", "upper")):
        scenario.inequality.append(
            InequalityEntry(
                str(row["variable"]),
                _quarter(row["date"], where),
                _bound(row.get("lower"), where, -np.inf),
                _bound(row.get("upper"), where, np.inf),
            )
        )
    for where, row in _rows(doc, "bands", ("variable", "centers", "half_widths")):
        centers, widths = row["centers"], row["half_widths"]
        if not isinstance(centers, dict):
            raise ScenarioFormatError(f"{where}.centers must map quarters to values")
        if not isinstance(widths, list):
            widths = [widths]
        pairs = sorted((_quarter(d, where), _number(v, where)) for d, v in centers.items())
        scenario.bands.append(
            BandEntry(str(row["variable"]), tuple(pairs), tuple(_number(w, where) for w in widths))
        )
    for where, row in _rows(doc, "shocks", ("variable", "date"), ("mean", "variance")):
        scenario.shocks.append(
            ShockEntry(
                str(row["variable"]),
                _quarter(row["date"], where),
                _number(row.get("mean", 0.0), where),
                _number(row.get("variance", 0.0), where),
            )
        )

    nondriving = doc.get("nondriving") or []
    if not isinstance(nondriving, list):
        raise ScenarioFormatError("'nondriving' must be a list of variables")
    scenario.nondriving = [str(v) for v in nondriving]

    estimation = doc.get("estimation") or {}
    if not isinstance(estimation, dict):
        raise ScenarioFormatError("'estimation' must be a mapping")
    unknown = sorted(set(estimation) - set(ESTIMATION_KEYS))
    if unknown:
        raise ScenarioFormatError(f"estimation: unknown keys {unknown}")
    scenario.estimation = dict(estimation)
    return scenario


def parse_scenario(path: Path | str) -> ScenarioFile:
    """
    Read a scenario file.

    Raises:
        ValidationError: file not found
        ScenarioFormatError: not valid YAML or not following the grammar
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"scenario file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ScenarioFormatError(f"{path}: {e}") from e
    scenario = scenario_from_dict(doc)
    logger.info(
        "Loaded scenario %s: %d equality, %d inequality, %d shock rows",
        path.name,
        len(scenario.equality),
        len(scenario.inequality_rows()),
        len(scenario.shocks),
    )
    return scenario


def scenario_to_dict(scenario: ScenarioFile) -> dict[str, Any]:
    """Canonical form: sorted rows, bands expanded into inequality rows."""

    def key(entry) -> tuple[pd.Period, str]:
        return entry.date, entry.variable

    doc: dict[str, Any] = {}
    if scenario.start is not None:
        doc["start"] = str(scenario.start)
    if scenario.horizon is not None:
        doc["horizon"] = scenario.horizon
    if scenario.equality:
        doc["equality"] = [
            {"variable": e.variable, "date": str(e.date), "value": float(e.value)}
            for e in sorted(scenario.equality, key=key)
        ]
    rows = scenario.inequality_rows()
    if rows:
        doc["inequality"] = [
            {
                "variable": e.variable,
                "date": str(e.date),
                "lower": _dump_bound(e.lower),
                "upper": _dump_bound(e.upper),
            }
            for e in sorted(rows, key=key)
        ]
    if scenario.shocks:
        doc["shocks"] = [
            {
                "variable": e.variable,
                "date": str(e.date),
                "mean": float(e.mean),
                "variance": float(e.variance),
            }
            for e in sorted(scenario.shocks, key=key)
        ]
    if scenario.nondriving:
        doc["nondriving"] = sorted(set(scenario.nondriving))
    if scenario.estimation:
        doc["estimation"] = dict(sorted(scenario.estimation.items()))
    return doc


def dump_scenario(scenario: ScenarioFile, path: Path | str) -> Path:
    """Write the canonical form of ``scenario``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = yaml.safe_dump(
        scenario_to_dict(scenario), sort_keys=False, allow_unicode=True, default_flow_style=None
    )
    path.write_text(text, encoding="utf-8")
    logger.debug("Wrote canonical scenario to %s", path)
    return path
