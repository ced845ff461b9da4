"""Dense-covariance references for small forecast systems."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from src.cond.draws import ForecastDraws
from src.core.errors import DimensionGuard, DimensionMismatch
from src.core.rng import SeedLike, as_generator
from src.linalg.selection import SelectionMatrix
from src.var.params import ReducedParams, SvarParams, reduced_to_structural
from src.var.system import build_forecast_system

MAX_DENSE_DIM = 2000


def _system(params: SvarParams | ReducedParams, history: np.ndarray, h: int):
    if isinstance(params, ReducedParams):
        params = reduced_to_structural(params)
    nh = params.n * h
    if nh > MAX_DENSE_DIM:
        raise DimensionGuard(f"dense oracle limited to nh <= {MAX_DENSE_DIM}, got {nh}")
    return build_forecast_system(params, history, h)


def dense_unconditional(
    params: SvarParams | ReducedParams, history: np.ndarray, h: int
) -> tuple[np.ndarray, np.ndarray]:
    """``(H^{-1} c, (H'H)^{-1})`` from dense algebra."""
    f = _system(params, history, h)
    H = f.dense_H()
    mean = linalg.solve(H, f.c)
    h_inv = linalg.inv(H)
    return mean, h_inv @ h_inv.T


def dense_oracle_equality(
    params: SvarParams | ReducedParams,
    history: np.ndarray,
    h: int,
    R_o: SelectionMatrix | None,
    r_o: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact moments of the forecast given ``y[R_o] = r_o`` by textbook Gaussian conditioning.

    Returns:
        ``(mean, covariance)`` over all ``nh`` coordinates; the constrained
        ones have mean ``r_o`` and zero covariance

    Raises:
        DimensionGuard: ``nh`` above 2000
    """
    mean, cov = dense_unconditional(params, history, h)
    if R_o is None or R_o.is_empty:
        return mean, cov
    if R_o.n_cols != mean.size:
        raise DimensionMismatch(f"selection has {R_o.n_cols} columns, system has {mean.size}")
    o = R_o.indices
    values = np.asarray(r_o, dtype=float).ravel()
    u = np.setdiff1d(np.arange(mean.size), o)

    out_mean = np.empty_like(mean)
    out_cov = np.zeros_like(cov)
    out_mean[o] = values
    if u.size:
        chol = linalg.cho_factor(cov[np.ix_(o, o)], lower=True)
        cross = cov[np.ix_(u, o)]
        out_mean[u] = mean[u] + cross @ linalg.cho_solve(chol, values - mean[o])
        block = cov[np.ix_(u, u)] - cross @ linalg.cho_solve(chol, cross.T)
        out_cov[np.ix_(u, u)] = 0.5 * (block + block.T)
    return out_mean, out_cov


class DenseEqualitySampler:
    """
    Equality-conditioned forecast draws through the dense conditional covariance.

    Every ``sample`` call repeats the full dense computation, so it times the
    cost a covariance-based method pays per parameter draw.
    """

    def __init__(self, R_o: SelectionMatrix, r_o: np.ndarray):
        self.R_o = R_o
        self.r_o = np.asarray(r_o, dtype=float).ravel()

    def sample(
        self,
        params: SvarParams | ReducedParams,
        history: np.ndarray,
        h: int,
        n_draws: int,
        seed: SeedLike = None,
    ) -> ForecastDraws:
        rng = as_generator(seed)
        mean, cov = dense_oracle_equality(params, history, h, self.R_o, self.r_o)
        free = np.setdiff1d(np.arange(mean.size), self.R_o.indices)
        draws = np.tile(mean, (n_draws, 1))
        if free.size:
            chol = linalg.cholesky(cov[np.ix_(free, free)], lower=True)
            draws[:, free] += (chol @ rng.standard_normal((free.size, n_draws))).T
        return ForecastDraws(draws, params.n, h)
