from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from src.core.errors import DimensionMismatch, ValidationError
from src.linalg.band import (
    BandMatrix,
    band_cholesky,
    band_gram,
    band_log_det,
    band_solve,
    band_solve_general,
)
from src.var.params import SvarParams

logger = logging.getLogger("condcast.var.system")


@dataclass(frozen=True, eq=False)
class ForecastSystem:
    """
    Stacked forecast system ``H y = c + u`` over ``h`` periods, ``u ~ N(0, I)``.

    ``y`` stacks ``y_{T+1}, ..., y_{T+h}``; variable ``j`` at horizon ``k`` (1-based)
    sits at ``j + n (k - 1)``.
    """

    H: BandMatrix
    c: np.ndarray
    n: int
    p: int
    h: int
    history: np.ndarray

    def __post_init__(self) -> None:
        nh = self.n * self.h
        if self.H.dim != nh:
            raise DimensionMismatch(f"H has dim {self.H.dim}, expected {nh}")
        c = np.array(self.c, dtype=float).ravel()
        if c.size != nh:
            raise DimensionMismatch(f"c has {c.size} entries, expected {nh}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        hist = np.array(self.history, dtype=float).reshape(self.p, self.n)
        hist.setflags(write=False)
        object.__setattr__(self, "history", hist)

    @property
    def dim(self) -> int:
        return self.n * self.h

    def index(self, variable: int, horizon: int) -> int:
        """Stacked coordinate of ``variable`` (0-based) at ``horizon`` (1-based)."""
        if not (0 <= variable < self.n and 1 <= horizon <= self.h):
            raise DimensionMismatch(f"(variable={variable}, horizon={horizon}) outside the system")
        return variable + self.n * (horizon - 1)

    def unstack(self, y: np.ndarray) -> np.ndarray:
        """``(..., nh)`` stacked vectors to ``(..., h, n)`` paths."""
        y = np.asarray(y, dtype=float)
        return y.reshape(*y.shape[:-1], self.h, self.n)

    @cached_property
    def _triangular_H(self) -> BandMatrix | None:
        if self.H.upper_bw == 0:
            return self.H
        if np.any(self.H.bands[: self.H.upper_bw] != 0.0):
            return None
        return BandMatrix(self.dim, self.H.lower_bw, 0, self.H.bands[self.H.upper_bw :])

    @cached_property
    def precision(self) -> BandMatrix:
        """``H'H``, the precision of the unconditional forecast."""
        return band_gram(self.H)

    @cached_property
    def precision_factor(self) -> BandMatrix:
        return band_cholesky(self.precision)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """``H^{-1} rhs`` for a vector or a matrix of columns."""
        tri = self._triangular_H
        if tri is not None:
            return band_solve(tri, rhs)
        return band_solve_general(self.H, rhs)

    def solve_transposed(self, rhs: np.ndarray) -> np.ndarray:
        """``H'^{-1} rhs``."""
        tri = self._triangular_H
        if tri is not None:
            return band_solve(tri, rhs, transposed=True)
        return band_solve_general(self.H.transpose(), rhs)

    def log_abs_det(self) -> float:
        """``log |det H|`` from the banded factorisation of ``H'H``."""
        return 0.5 * band_log_det(self.precision_factor)

    def dense_H(self) -> np.ndarray:
        return self.H.to_dense()


def _check_history(history: np.ndarray, n: int, p: int) -> np.ndarray:
    hist = np.asarray(history, dtype=float)
    if p == 0 and hist.size == 0:
        return np.zeros((0, n))
    if hist.ndim == 1 and p == 1:
        hist = hist[None, :]
    if hist.shape != (p, n):
        raise DimensionMismatch(f"history must have shape ({p}, {n}), got {hist.shape}")
    if not np.all(np.isfinite(hist)):
        raise ValidationError("history contains non-finite values")
    return hist


def build_forecast_system(s: SvarParams, history: np.ndarray, h: int) -> ForecastSystem:
    """
    Stack the structural VAR over ``h`` periods.

    Args:
        s: Structural parameters; ``shock_scale`` rows are divided by ``sigma_i``
        history: Last ``p`` observations, oldest first (``history[-1]`` is ``y_T``)
        h: Forecast horizon

    Returns:
        ForecastSystem with ``H`` of lower bandwidth ``n(p+1)-1`` and upper ``n-1``
    """
    if h < 1:
        raise ValidationError(f"horizon must be at least 1, got {h}")
    n, p = s.n, s.p
    hist = _check_history(history, n, p)
    nh = n * h
    scale = np.ones(n) if s.shock_scale is None else 1.0 / np.sqrt(s.shock_scale)

    blocks = [[None] * h for _ in range(h)]
    a0 = s.A0 * scale[:, None]
    lags = [-aj * scale[:, None] for aj in s.A_lags]
    for t in range(h):
        blocks[t][t] = a0
        for j in range(1, min(p, t) + 1):
            blocks[t][t - j] = lags[j - 1]
    H = BandMatrix.from_sparse(
        sp.bmat(blocks, format="coo", dtype=float),
        min(n * (p + 1) - 1, nh - 1),
        min(n - 1, nh - 1),
    )

    c = np.tile(s.a, (h, 1))
    for t in range(min(p, h)):
        for j in range(t + 1, p + 1):
            c[t] += s.A_lags[j - 1] @ hist[p + t - j]
    c = (c * scale).ravel()

    logger.debug("Built forecast system n=%d p=%d h=%d bandwidths=(%d, %d)",
                 n, p, h, H.lower_bw, H.upper_bw)
    return ForecastSystem(H=H, c=c, n=n, p=p, h=h, history=hist)


def unconditional_moments(f: ForecastSystem) -> tuple[np.ndarray, BandMatrix]:
    """Mean ``H^{-1} c`` and precision ``H'H`` of the unconditional forecast."""
    return f.solve(f.c), f.precision


def simulate_recursive(s: SvarParams, history: np.ndarray, shocks: np.ndarray) -> np.ndarray:
    """
    Period-by-period recursion ``A0 y_t = a + sum_j A_j y_{t-j} + sigma * u_t``.

    Args:
        s: Structural parameters
        history: Last ``p`` observations, oldest first
        shocks: ``(h, n)`` standard shocks ``u_t``

    Returns:
        ``(h, n)`` simulated path
    """
    n, p = s.n, s.p
    hist = _check_history(history, n, p)
    shocks = np.asarray(shocks, dtype=float)
    if shocks.ndim != 2 or shocks.shape[1] != n:
        raise DimensionMismatch(f"shocks must have shape (h, {n}), got {shocks.shape}")
    sigma = np.ones(n) if s.shock_scale is None else np.sqrt(s.shock_scale)
    a0_inv = np.linalg.inv(s.A0)
    window = np.vstack([hist, np.zeros_like(shocks)])
    for t in range(shocks.shape[0]):
        rhs = s.a + sigma * shocks[t]
        for j in range(1, p + 1):
            rhs = rhs + s.A_lags[j - 1] @ window[p + t - j]
        window[p + t] = a0_inv @ rhs
    return window[p:]
