from __future__ import annotations

from functools import cached_property

import numpy as np

from src.core.errors import DimensionMismatch
from src.linalg.band import BandMatrix, band_cho_solve, band_cholesky, band_solve


class PrecisionGaussian:
    """
    ``N(mean, K^{-1})`` with a banded precision ``K``.

    The banded Cholesky factor of ``K`` is computed once and shared by every
    draw and every conditioning step.
    """

    def __init__(self, mean: np.ndarray, precision: BandMatrix, factor: BandMatrix | None = None):
        mean = np.asarray(mean, dtype=float).ravel()
        if mean.size != precision.dim:
            raise DimensionMismatch(f"mean has {mean.size} entries, precision dim {precision.dim}")
        self.mean = mean
        self.precision = precision
        if factor is not None:
            self.__dict__["factor"] = factor

    @property
    def dim(self) -> int:
        return self.mean.size

    @cached_property
    def factor(self) -> BandMatrix:
        return band_cholesky(self.precision)

    def noise(self, z: np.ndarray) -> np.ndarray:
        """``L'^{-1} z``: zero-mean draws from standard normal columns ``z``."""
        return band_solve(self.factor, z, transposed=True)

    def draw(self, n_draws: int, rng: np.random.Generator) -> np.ndarray:
        """``n_draws x dim`` draws."""
        z = rng.standard_normal((self.dim, n_draws))
        return (self.mean[:, None] + self.noise(z)).T

    def marginal_covariance(self, indices: np.ndarray) -> np.ndarray:
        """Covariance ``M_o' K^{-1} M_o`` of the selected coordinates."""
        idx = np.asarray(indices, dtype=int)
        embed = np.zeros((self.dim, idx.size))
        embed[idx, np.arange(idx.size)] = 1.0
        cov = band_cho_solve(self.factor, embed)[idx]
        return 0.5 * (cov + cov.T)

    def _split(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(indices, dtype=int)
        if idx.size and (
            np.unique(idx).size != idx.size or idx.min() < 0 or idx.max() >= self.dim
        ):
            raise DimensionMismatch("conditioning indices must be distinct and inside the vector")
        free = np.setdiff1d(np.arange(self.dim), idx)
        return idx, free

    def free_precision(self, indices: np.ndarray) -> BandMatrix:
        """``K_u = M_u' K M_u`` of the coordinates not in ``indices``."""
        _, free = self._split(indices)
        return self.precision.principal_submatrix(free)

    def conditional_mean(
        self, indices: np.ndarray, values: np.ndarray, free_factor: BandMatrix | None = None
    ) -> np.ndarray:
        """
        ``mu_u = K_u^{-1} M_u' K (mean - M_o y_o)`` for one value vector or for a
        matrix with one column per draw.
        """
        idx, free = self._split(indices)
        values = np.asarray(values, dtype=float)
        if values.shape[0] != idx.size:
            raise DimensionMismatch(f"{values.shape[0]} values for {idx.size} coordinates")
        shifted = np.repeat(self.mean[:, None], 1 if values.ndim == 1 else values.shape[1], axis=1)
        shifted[idx] -= values if values.ndim == 2 else values[:, None]
        rhs = (self.precision @ shifted)[free]
        if free_factor is None:
            free_factor = band_cholesky(self.precision.principal_submatrix(free))
        mu = band_cho_solve(free_factor, rhs)
        return mu[:, 0] if values.ndim == 1 else mu

    def condition_on(self, indices: np.ndarray, values: np.ndarray) -> PrecisionGaussian:
        """Law of the free coordinates given ``y[indices] = values``."""
        k_u = self.free_precision(indices)
        factor = band_cholesky(k_u)
        return PrecisionGaussian(self.conditional_mean(indices, values, factor), k_u, factor)

    def draw_given(
        self, indices: np.ndarray, values: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """
        Complete ``m`` partial draws: ``values`` is ``m x s_o`` and fills
        ``indices``; the free coordinates come from their conditional law.

        Returns:
            ``m x dim`` full draws
        """
        idx, free = self._split(indices)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        m = values.shape[0]
        out = np.empty((m, self.dim))
        out[:, idx] = values
        if free.size:
            k_u = self.precision.principal_submatrix(free)
            factor = band_cholesky(k_u)
            mu = self.conditional_mean(idx, values.T, factor)
            z = rng.standard_normal((free.size, m))
            out[:, free] = (mu + band_solve(factor, z, transposed=True)).T
        return out
