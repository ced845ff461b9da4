"""Quantile, difference and response tables; raw-draw archives."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from src.cond.draws import ForecastDraws
from src.core.errors import DimensionMismatch, ValidationError

logger = logging.getLogger("condcast.fmt.output")

FLOAT_FORMAT = "%.6f"


def quantile_column(level: float) -> str:
    """``5 -> q05``, ``2.5 -> q2.5``."""
    level = float(level)
    if level.is_integer():
        return f"q{int(level):02d}"
    return f"q{level:g}"


def summary_table(
    samples: np.ndarray,
    variables: Sequence[str],
    dates: pd.PeriodIndex,
    levels: Sequence[float],
) -> pd.DataFrame:
    """
    Percentiles of ``samples`` (``(m, h * n)`` in stacked order) for every cell.

    Rows run over variables, then dates; columns are
    ``variable, date, q..`` with one column per level.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n, h = len(variables), len(dates)
    if samples.shape[1] != n * h:
        raise DimensionMismatch(f"{samples.shape[1]} columns for n={n}, h={h}")
    if not levels:
        raise ValidationError("no quantile levels")
    q = np.percentile(samples, np.asarray(levels, dtype=float), axis=0)
    # (levels, h, n) -> (n, h, levels)
    q = q.reshape(len(levels), h, n).transpose(2, 1, 0)
    frame = pd.DataFrame(
        {
            "variable": np.repeat(list(variables), h),
            "date": np.tile([str(d) for d in dates], n),
        }
    )
    for j, level in enumerate(levels):
        frame[quantile_column(level)] = q[:, :, j].ravel()
    return frame


def quantile_table(
    draws: ForecastDraws, dates: pd.PeriodIndex, levels: Sequence[float]
) -> pd.DataFrame:
    """Forecast quantiles per variable and quarter."""
    if len(dates) != draws.h:
        raise DimensionMismatch(f"{len(dates)} dates for horizon {draws.h}")
    variables = draws.variables or tuple(f"y{i + 1}" for i in range(draws.n))
    return summary_table(draws.draws, variables, dates, levels)


def difference_table(
    conditional: ForecastDraws,
    unconditional: ForecastDraws,
    dates: pd.PeriodIndex,
    levels: Sequence[float],
) -> pd.DataFrame:
    """
    Quantiles over parameter draws of the conditional minus the unconditional
    mean path.

    Raises:
        DimensionMismatch: the two runs do not cover the same parameter draws
    """
    if (conditional.n, conditional.h) != (unconditional.n, unconditional.h):
        raise DimensionMismatch("conditional and unconditional draws differ in (n, h)")
    if not np.array_equal(np.unique(conditional.param_index), np.unique(unconditional.param_index)):
        raise DimensionMismatch("conditional and unconditional draws use different parameters")
    diff = conditional.group_means() - unconditional.group_means()
    variables = conditional.variables or tuple(f"y{i + 1}" for i in range(conditional.n))
    return summary_table(diff, variables, dates, levels)


def irf_table(
    responses: np.ndarray,
    variables: Sequence[str],
    dates: pd.PeriodIndex,
    levels: Sequence[float],
) -> pd.DataFrame:
    """Quantiles over parameter draws of ``(m, h, n)`` mean-path responses."""
    responses = np.asarray(responses, dtype=float)
    if responses.ndim != 3:
        raise DimensionMismatch(f"responses must be (m, h, n), got {responses.shape}")
    m = responses.shape[0]
    return summary_table(responses.reshape(m, -1), variables, dates, levels)


def write_table(frame: pd.DataFrame, path: Path | str) -> Path:
    """CSV with fixed float format and ``\\n`` line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def write_draws(draws: ForecastDraws, dates: pd.PeriodIndex, path: Path | str) -> Path:
    """Raw draws as an ``.npz`` archive: ``draws``, ``param_index``, ``variables``, ``dates``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {
        "draws": draws.draws,
        "param_index": draws.param_index,
        "variables": np.array(draws.variables, dtype=str),
        "dates": np.array([str(d) for d in dates], dtype=str),
    }
    if draws.seed_entropy is not None:
        arrays["seed_entropy"] = np.array(str(draws.seed_entropy))
    np.savez(path, **arrays)
    logger.info("Saved %d forecast draws to %s", draws.n_draws, path)
    return path
