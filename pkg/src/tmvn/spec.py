from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from src.core.errors import DimensionMismatch, InvalidBounds, NotPositiveDefinite, ValidationError

SYMMETRY_TOL = 1e-10
# Slack allowed when checking that draws respect the box
SUPPORT_SLACK = 1e-12


def _vector(x: np.ndarray | list[float] | float, d: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float).ravel()
    if arr.size == 1 and d > 1:
        arr = np.full(d, arr[0])
    if arr.size != d:
        raise DimensionMismatch(f"{name} has {arr.size} entries, expected {d}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TruncatedGaussianSpec:
    """
    ``N(mean, Sigma)`` restricted to the box ``lower < x < upper``.

    ``matrix`` is the covariance, or the precision when ``is_precision`` is set.
    Bounds may be infinite.
    """

    mean: np.ndarray
    matrix: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    is_precision: bool = False

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float).ravel()
        d = mean.size
        if d < 1:
            raise ValidationError("truncated Gaussian needs at least one dimension")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)

        matrix = np.array(self.matrix, dtype=float)
        if matrix.shape != (d, d):
            raise DimensionMismatch(f"matrix must be {d}x{d}, got {matrix.shape}")
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOL * scale:
            raise NotPositiveDefinite("matrix is not symmetric")
        matrix = 0.5 * (matrix + matrix.T)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

        lower = _vector(self.lower, d, "lower")
        upper = _vector(self.upper, d, "upper")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise InvalidBounds("bounds must not be NaN")
        bad = np.flatnonzero(lower >= upper)
        if bad.size:
            i = int(bad[0])
            raise InvalidBounds(f"lower[{i}]={lower[i]} is not below upper[{i}]={upper[i]}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        # Fails early on indefinite input
        _ = self.cholesky

    @classmethod
    def from_covariance(cls, mean, cov, lower, upper) -> TruncatedGaussianSpec:
        return cls(mean, cov, lower, upper, is_precision=False)

    @classmethod
    def from_precision(cls, mean, precision, lower, upper) -> TruncatedGaussianSpec:
        return cls(mean, precision, lower, upper, is_precision=True)

    @property
    def dim(self) -> int:
        return self.mean.size

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor of ``matrix``."""
        try:
            return linalg.cholesky(self.matrix, lower=True)
        except linalg.LinAlgError as e:
            raise NotPositiveDefinite(f"matrix is not positive definite: {e}") from e

    @cached_property
    def covariance(self) -> np.ndarray:
        if not self.is_precision:
            return self.matrix
        inv_l = linalg.solve_triangular(self.cholesky, np.eye(self.dim), lower=True)
        return inv_l.T @ inv_l

    @cached_property
    def precision(self) -> np.ndarray:
        if self.is_precision:
            return self.matrix
        inv_l = linalg.solve_triangular(self.cholesky, np.eye(self.dim), lower=True)
        return inv_l.T @ inv_l

    @property
    def is_unbounded(self) -> bool:
        return bool(np.all(np.isneginf(self.lower)) and np.all(np.isposinf(self.upper)))

    def contains(self, x: np.ndarray, slack: float = SUPPORT_SLACK) -> np.ndarray:
        """Row mask of draws ``x`` (``(m, d)``) inside the box up to ``slack``."""
        x = np.atleast_2d(x)
        return np.all((x >= self.lower - slack) & (x <= self.upper + slack), axis=1)


@dataclass(frozen=True, eq=False)
class TmvnResult:
    """Draws of a truncated-Gaussian sampler, one row per draw."""

    draws: np.ndarray
    acceptance_rate: float
    n_proposals: int

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]


def move_inside(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Map values that rounded onto (or past) a bound to the nearest interior float."""
    x = np.where(x <= lower, np.nextafter(lower, upper), x)
    return np.where(x >= upper, np.nextafter(upper, lower), x)
