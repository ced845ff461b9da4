from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from src.core.errors import DimensionMismatch, ValidationError

# Tolerance for equality rows on returned draws
EQUALITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ForecastDraws:
    """
    Forecast draws in stacked coordinates, one row per draw.

    ``param_index[k]`` is the parameter draw that produced row ``k``;
    ``seed_entropy`` is the root entropy the rows were generated from.
    """

    draws: np.ndarray
    n: int
    h: int
    param_index: np.ndarray | None = None
    seed_entropy: int | None = None
    variables: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        draws = np.atleast_2d(np.asarray(self.draws, dtype=float))
        if draws.shape[1] != self.n * self.h:
            raise DimensionMismatch(f"draws have {draws.shape[1]} columns, expected {self.n * self.h}")
        object.__setattr__(self, "draws", draws)
        index = (
            np.zeros(draws.shape[0], dtype=int)
            if self.param_index is None
            else np.asarray(self.param_index, dtype=int).ravel()
        )
        if index.size != draws.shape[0]:
            raise DimensionMismatch("param_index must label every draw")
        object.__setattr__(self, "param_index", index)
        variables = tuple(self.variables)
        if variables and len(variables) != self.n:
            raise DimensionMismatch(f"{len(variables)} variable names for n={self.n}")
        object.__setattr__(self, "variables", variables)

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    def __len__(self) -> int:
        return self.n_draws

    def paths(self) -> np.ndarray:
        """``(n_draws, h, n)`` view of the draws."""
        return self.draws.reshape(self.n_draws, self.h, self.n)

    def cell(self, variable: int | str, horizon: int) -> np.ndarray:
        """Draws of one variable at one horizon (1-based)."""
        if isinstance(variable, str):
            if variable not in self.variables:
                raise ValidationError(f"unknown variable {variable!r}")
            variable = self.variables.index(variable)
        if not (0 <= variable < self.n and 1 <= horizon <= self.h):
            raise DimensionMismatch(f"(variable={variable}, horizon={horizon}) outside the draws")
        return self.draws[:, variable + self.n * (horizon - 1)]

    def mean(self) -> np.ndarray:
        return self.draws.mean(axis=0)

    def quantiles(self, levels: Sequence[float]) -> np.ndarray:
        """Percentiles (``levels`` in 0..100) of every coordinate, ``(len(levels), nh)``."""
        return np.percentile(self.draws, np.asarray(levels, dtype=float), axis=0)

    def group_means(self) -> np.ndarray:
        """Mean draw of every parameter draw, ``(n_params, nh)`` in ``param_index`` order."""
        groups = np.unique(self.param_index)
        return np.stack([self.draws[self.param_index == g].mean(axis=0) for g in groups])

    def with_variables(self, names: Sequence[str]) -> ForecastDraws:
        return ForecastDraws(self.draws, self.n, self.h, self.param_index, self.seed_entropy, tuple(names))

    @classmethod
    def concat(cls, parts: Sequence[ForecastDraws], seed_entropy: int | None = None) -> ForecastDraws:
        """Stack draws in the given order, keeping their provenance."""
        if not parts:
            raise ValidationError("nothing to concatenate")
        n, h = parts[0].n, parts[0].h
        if any(p.n != n or p.h != h for p in parts):
            raise DimensionMismatch("forecast draws disagree on (n, h)")
        return cls(
            np.vstack([p.draws for p in parts]),
            n,
            h,
            np.concatenate([p.param_index for p in parts]),
            seed_entropy,
            parts[0].variables,
        )

    def max_equality_violation(self, indices: np.ndarray, values: np.ndarray) -> float:
        """Largest ``|y[indices] - values|`` over all draws."""
        idx = np.asarray(indices, dtype=int)
        if idx.size == 0:
            return 0.0
        return float(np.max(np.abs(self.draws[:, idx] - np.asarray(values, dtype=float))))

    def count_violations(self, constraints) -> int:
        """Draws breaking an equality row by more than ``EQUALITY_TOL`` or leaving an open interval."""
        bad = np.zeros(self.n_draws, dtype=bool)
        if constraints.equality is not None:
            eq = constraints.equality
            scale = np.maximum(1.0, np.abs(eq.values))
            dev = np.abs(self.draws[:, eq.selection.indices] - eq.values) / scale
            bad |= np.any(dev > EQUALITY_TOL, axis=1)
        if constraints.inequality is not None:
            ineq = constraints.inequality
            y = self.draws[:, ineq.selection.indices]
            bad |= np.any((y <= ineq.lower) | (y >= ineq.upper), axis=1)
        return int(bad.sum())
