from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.core.errors import (
    DimensionMismatch,
    InvalidBounds,
    OverlapEqualityInequality,
    ValidationError,
)
from src.linalg.selection import SelectionMatrix

PSD_TOL = 1e-10

KIND_UNCONDITIONAL = "unconditional"
KIND_EQUALITY = "equality"
KIND_INEQUALITY = "inequality"
KIND_MIXED = "mixed"
KIND_COMBINED = "combined"
KIND_LINEAR = "linear"
KIND_LINEAR_TRUNCATED = "linear_truncated"


def _vector(x, size: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float).ravel()
    if arr.size != size:
        raise DimensionMismatch(f"{name} has {arr.size} entries, expected {size}")
    arr.setflags(write=False)
    return arr


def _check_psd(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.atleast_2d(np.array(matrix, dtype=float))
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    if np.max(np.abs(matrix - matrix.T), initial=0.0) > PSD_TOL * scale:
        raise ValidationError(f"{name} is not symmetric")
    matrix = 0.5 * (matrix + matrix.T)
    if matrix.size and np.min(np.linalg.eigvalsh(matrix)) < -PSD_TOL * scale:
        raise ValidationError(f"{name} is not positive semi-definite")
    matrix.setflags(write=False)
    return matrix


def dense_rows(rows: SelectionMatrix | np.ndarray, n_cols: int) -> np.ndarray:
    """Dense ``k x n_cols`` copy of a selection or a general restriction matrix."""
    if isinstance(rows, SelectionMatrix):
        if rows.n_cols != n_cols:
            raise DimensionMismatch(f"selection has {rows.n_cols} columns, expected {n_cols}")
        return rows.to_dense()
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != n_cols:
        raise DimensionMismatch(f"restriction matrix has {rows.shape[1]} columns, expected {n_cols}")
    return rows


@dataclass(frozen=True, eq=False)
class EqualityRows:
    """Hard conditions ``R_o y = r_o`` with ``R_o`` a selection."""

    selection: SelectionMatrix
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _vector(self.values, self.selection.n_rows, "equality values")
        if not np.all(np.isfinite(values)):
            raise ValidationError("equality values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.selection.n_rows


@dataclass(frozen=True, eq=False)
class GaussianRows:
    """
    Soft conditions ``R y ~ N(r, Omega)``.

    ``omega=None`` requests the variance-preserving choice ``R (H'H)^{-1} R'``,
    evaluated for every forecast system.
    """

    R: np.ndarray
    r: np.ndarray
    omega: np.ndarray | None = None

    def __post_init__(self) -> None:
        R = np.atleast_2d(np.array(self.R, dtype=float))
        R.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", _vector(self.r, R.shape[0], "Gaussian mean"))
        if self.omega is not None:
            omega = _check_psd(self.omega, "Omega")
            if omega.shape[0] != R.shape[0]:
                raise DimensionMismatch(f"Omega must be {R.shape[0]}x{R.shape[0]}")
            object.__setattr__(self, "omega", omega)

    def __len__(self) -> int:
        return self.R.shape[0]

    @property
    def variance_preserving(self) -> bool:
        return self.omega is None

    def columns(self) -> np.ndarray:
        """Coordinates with a nonzero coefficient in any row."""
        return np.flatnonzero(np.any(self.R != 0.0, axis=0))


@dataclass(frozen=True, eq=False)
class InequalityRows:
    """Interval conditions ``lower < S y < upper`` with ``S`` a selection."""

    selection: SelectionMatrix
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        k = self.selection.n_rows
        lower = _vector(self.lower, k, "lower bounds")
        upper = _vector(self.upper, k, "upper bounds")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise InvalidBounds("bounds must not be NaN")
        bad = np.flatnonzero(lower >= upper)
        if bad.size:
            i = int(bad[0])
            raise InvalidBounds(f"row {i}: lower {lower[i]} is not below upper {upper[i]}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __len__(self) -> int:
        return self.selection.n_rows


@dataclass(frozen=True, eq=False)
class ShockRows:
    """Restrictions ``W eps ~ N(w, Psi)`` on the standardised structural shocks."""

    W: SelectionMatrix | np.ndarray
    mean: np.ndarray
    psi: np.ndarray

    def __post_init__(self) -> None:
        k = self.W.n_rows if isinstance(self.W, SelectionMatrix) else np.atleast_2d(self.W).shape[0]
        object.__setattr__(self, "mean", _vector(self.mean, k, "shock mean"))
        psi = _check_psd(self.psi, "Psi")
        if psi.shape[0] != k:
            raise DimensionMismatch(f"Psi must be {k}x{k}")
        object.__setattr__(self, "psi", psi)

    def __len__(self) -> int:
        return int(self.mean.size)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """
    All conditions of one forecasting exercise, in stacked coordinates.

    ``scenario_nondriving`` selects the shock coordinates that keep their
    unconditional ``N(0, 1)`` law; it turns the observable rows into a
    structural scenario.
    """

    equality: EqualityRows | None = None
    gaussian: GaussianRows | None = None
    inequality: InequalityRows | None = None
    shocks: ShockRows | None = None
    scenario_nondriving: SelectionMatrix | None = None

    def __post_init__(self) -> None:
        # Blocks without rows carry no information
        for name in ("equality", "gaussian", "inequality", "shocks"):
            block = getattr(self, name)
            if block is not None and len(block) == 0:
                object.__setattr__(self, name, None)
        if self.scenario_nondriving is not None and self.scenario_nondriving.is_empty:
            object.__setattr__(self, "scenario_nondriving", None)

    def is_empty(self) -> bool:
        return all(
            block is None
            for block in (
                self.equality,
                self.gaussian,
                self.inequality,
                self.shocks,
                self.scenario_nondriving,
            )
        )

    def kind(self) -> str:
        """
        Sampler family serving this set.

        Raises:
            ValidationError: Gaussian rows with an explicit Omega next to inequality rows
        """
        linear = (
            self.gaussian is not None
            or self.shocks is not None
            or self.scenario_nondriving is not None
        )
        if self.inequality is None:
            if linear:
                return KIND_LINEAR
            return KIND_EQUALITY if self.equality is not None else KIND_UNCONDITIONAL
        if self.gaussian is not None and not self.gaussian.variance_preserving:
            raise ValidationError(
                "inequality rows combine only with variance-preserving Gaussian rows (omega=None)"
            )
        if not linear:
            return KIND_MIXED if self.equality is not None else KIND_INEQUALITY
        if self.equality is None and self.shocks is None and self.scenario_nondriving is None:
            return KIND_COMBINED
        return KIND_LINEAR_TRUNCATED

    def validate(self, nh: int) -> None:
        """
        Check the blocks against a system of dimension ``nh``.

        Raises:
            DimensionMismatch: a block does not conform to ``nh``
            OverlapEqualityInequality: a coordinate is both pinned and bounded
        """
        for sel in (
            self.equality and self.equality.selection,
            self.inequality and self.inequality.selection,
            self.scenario_nondriving,
        ):
            if sel is not None and sel.n_cols != nh:
                raise DimensionMismatch(f"selection has {sel.n_cols} columns, system has {nh}")
        if self.gaussian is not None:
            dense_rows(self.gaussian.R, nh)
        if self.shocks is not None:
            dense_rows(self.shocks.W, nh)
        if self.equality is not None and self.inequality is not None:
            both = np.intersect1d(self.equality.selection.indices, self.inequality.selection.indices)
            if both.size:
                raise OverlapEqualityInequality(
                    f"coordinates {both.tolist()} are both fixed and bounded"
                )
        self.kind()

    def n_rows(self) -> int:
        return sum(
            len(block)
            for block in (self.equality, self.gaussian, self.inequality, self.shocks)
            if block is not None
        ) + (0 if self.scenario_nondriving is None else self.scenario_nondriving.n_rows)
