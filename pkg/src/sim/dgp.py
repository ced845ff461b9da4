"""Synthetic VAR data for the simulation study."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from src.core.errors import ExplosiveDraw, InsufficientData, ValidationError
from src.core.rng import as_generator
from src.var.params import ReducedParams, reduced_to_structural
from src.var.system import simulate_recursive

logger = logging.getLogger("condcast.sim.dgp")

WARMUP = 100
EXPLOSIVE_THRESHOLD = 1e8
MAX_REDRAWS = 10


@dataclass(frozen=True)
class DgpSpec:
    """
    Data-generating process of the simulation study.

    Coefficients: intercept ``intercept * 1``; first-lag diagonal
    ``U(diag_bounds)``, off-diagonal ``U(offdiag_bounds)``; higher lags
    ``N(0, higher_lag_scale^2 / p^2)``. Covariance
    ``IW(n + iw_extra_dof, iw_identity * I + iw_ones * 11')``.
    """

    n: int
    p: int
    T: int
    seed: int | None = 0
    holdout: int = 0
    intercept: float = 0.01
    diag_bounds: tuple[float, float] = (0.0, 0.5)
    offdiag_bounds: tuple[float, float] = (-0.2, 0.2)
    higher_lag_scale: float = 0.05
    iw_extra_dof: int = 10
    iw_identity: float = 0.07
    iw_ones: float = 0.03
    warmup: int = WARMUP

    def __post_init__(self) -> None:
        if self.n < 1 or self.p < 1:
            raise ValidationError(f"n and p must be positive, got n={self.n} p={self.p}")
        if self.T <= self.n * self.p + 1:
            raise InsufficientData(f"T={self.T} must exceed n*p+1={self.n * self.p + 1}")
        if self.holdout < 0 or self.warmup < 0:
            raise ValidationError("holdout and warmup must be non-negative")
        if self.higher_lag_scale <= 0 or self.iw_identity <= 0 or self.iw_ones < 0:
            raise ValidationError("scale parameters must be positive")
        if self.iw_extra_dof < 0:
            raise ValidationError("iw_extra_dof must be non-negative")
        for lo, hi in (self.diag_bounds, self.offdiag_bounds):
            if not lo < hi:
                raise ValidationError(f"uniform bounds ({lo}, {hi}) are not ordered")

    @property
    def iw_scale(self) -> np.ndarray:
        return self.iw_identity * np.eye(self.n) + self.iw_ones * np.ones((self.n, self.n))


def draw_dgp_params(spec: DgpSpec, rng: np.random.Generator) -> ReducedParams:
    """One draw of the coefficient and covariance laws of ``spec``."""
    n, p = spec.n, spec.p
    lags = np.empty((p, n, n))
    lags[0] = rng.uniform(*spec.offdiag_bounds, size=(n, n))
    lags[0][np.diag_indices(n)] = rng.uniform(*spec.diag_bounds, size=n)
    if p > 1:
        lags[1:] = rng.normal(0.0, spec.higher_lag_scale / p, size=(p - 1, n, n))
    sigma = stats.invwishart.rvs(df=n + spec.iw_extra_dof, scale=spec.iw_scale, random_state=rng)
    sigma = np.atleast_2d(sigma)
    return ReducedParams(np.full(n, spec.intercept), lags, sigma)


def generate_dgp(spec: DgpSpec) -> tuple[ReducedParams, np.ndarray]:
    """
    Draw parameters and simulate ``T + holdout`` observations.

    The recursion starts from zeros and the first ``warmup`` periods are
    discarded. A path leaving ``|y| <= 1e8`` triggers a fresh parameter draw.

    Returns:
        ``(params, data)`` with ``data`` of shape ``(T + holdout, n)``

    Raises:
        ExplosiveDraw: still explosive after 10 redraws
    """
    rng = as_generator(spec.seed)
    length = spec.T + spec.holdout
    for attempt in range(MAX_REDRAWS + 1):
        params = draw_dgp_params(spec, rng)
        shocks = rng.standard_normal((spec.warmup + length, spec.n))
        path = simulate_recursive(
            reduced_to_structural(params), np.zeros((spec.p, spec.n)), shocks
        )
        if np.all(np.isfinite(path)) and np.max(np.abs(path)) <= EXPLOSIVE_THRESHOLD:
            logger.debug("DGP n=%d p=%d T=%d drawn after %d redraws", spec.n, spec.p, spec.T, attempt)
            return params, path[spec.warmup :]
        logger.warning("Explosive DGP draw (attempt %d of %d), redrawing", attempt + 1, MAX_REDRAWS + 1)
    raise ExplosiveDraw(f"DGP still explosive after {MAX_REDRAWS} redraws")
