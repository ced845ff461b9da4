from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.core.errors import (
    DimensionMismatch,
    EmptyConstraint,
    InconsistentSystem,
    IndefiniteShockCov,
    RankDeficientR,
)
from src.var.system import ForecastSystem

logger = logging.getLogger("condcast.cond.moments")

# Eigenvalues of I + Psi_eps within EIG_CLIP_TOL (relative) of zero are rounding noise
EIG_CLIP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ConditionalMoments:
    """
    Restricted shock law ``eps ~ N(mu_eps, I + Psi_eps)`` and the implied forecast mean.

    ``cov_factor`` is ``nh x rank`` with ``F F' = I + Psi_eps``.
    """

    mu_y: np.ndarray
    shock_mean_shift: np.ndarray
    shock_cov_shift: np.ndarray
    cov_factor: np.ndarray

    @property
    def rank(self) -> int:
        return self.cov_factor.shape[1]

    def covariance(self, f: ForecastSystem) -> np.ndarray:
        """Dense forecast covariance ``H^{-1} (I + Psi_eps) H^{-1}'``."""
        hf = f.solve(self.cov_factor)
        return hf @ hf.T


def restriction_map(f: ForecastSystem, R: np.ndarray) -> np.ndarray:
    """``R H^{-1}`` computed as ``(H'^{-1} R')'``."""
    return f.solve_transposed(np.asarray(R, dtype=float).T).T


def pseudo_inverse(G: np.ndarray) -> tuple[np.ndarray, int]:
    """
    Moore-Penrose inverse with singular values below ``max(G.shape) * eps * s_max`` cut.

    Returns:
        ``(G^+, rank)``
    """
    U, s, Vt = np.linalg.svd(G, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(G.T.shape), 0
    tol = max(G.shape) * np.finfo(float).eps * s[0]
    keep = s > tol
    pinv = (Vt[keep].T / s[keep]) @ U[:, keep].T
    return pinv, int(keep.sum())


def psd_factor(matrix: np.ndarray, name: str = "I + Psi_eps") -> np.ndarray:
    """
    ``F`` with ``F F' = matrix`` from a symmetric eigendecomposition.

    Raises:
        IndefiniteShockCov: an eigenvalue below ``-EIG_CLIP_TOL``
    """
    sym = 0.5 * (matrix + matrix.T)
    evals, evecs = np.linalg.eigh(sym)
    cut = EIG_CLIP_TOL * max(1.0, abs(evals[-1])) if evals.size else 0.0
    if evals.size and evals[0] < -cut:
        raise IndefiniteShockCov(f"{name} has eigenvalue {evals[0]:.3e}")
    keep = evals > cut
    return evecs[:, keep] * np.sqrt(evals[keep])


def variance_preserving_omega(f: ForecastSystem, R: np.ndarray) -> np.ndarray:
    """``R (H'H)^{-1} R'``, the Omega that leaves the forecast covariance unchanged."""
    G = restriction_map(f, R)
    return G @ G.T


def conditional_moments_linear(
    f: ForecastSystem, R: np.ndarray, r: np.ndarray, omega: np.ndarray | None = None
) -> ConditionalMoments:
    """
    Minimal-norm restricted shock moments for ``R y ~ N(r, Omega)``.

    ``mu_eps = G^+ (r - G c)`` and ``Psi_eps = G^+ (Omega - G G') G^+'`` with
    ``G = R H^{-1}``; the forecast mean is ``H^{-1}(c + mu_eps)``.

    Args:
        f: Forecast system
        R: ``q x nh`` restriction matrix of full row rank
        r: Restricted mean
        omega: Restricted covariance; ``None`` is the variance-preserving choice

    Raises:
        EmptyConstraint: ``R`` has no rows
        InconsistentSystem: more rows than coordinates
        RankDeficientR: ``R H^{-1}`` is rank deficient
        IndefiniteShockCov: ``I + Psi_eps`` is not positive semi-definite
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    q, nh = R.shape
    if nh != f.dim:
        raise DimensionMismatch(f"R has {nh} columns, system has {f.dim}")
    if q == 0:
        raise EmptyConstraint("no restriction rows")
    if q > nh:
        raise InconsistentSystem(f"{q} restrictions on {nh} coordinates")
    r = np.asarray(r, dtype=float).ravel()
    if r.size != q:
        raise DimensionMismatch(f"r has {r.size} entries, expected {q}")

    G = restriction_map(f, R)
    pinv, rank = pseudo_inverse(G)
    if rank < q:
        raise RankDeficientR(f"R H^-1 has rank {rank} < {q} rows")
    if omega is None:
        omega = G @ G.T
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if omega.shape != (q, q):
        raise DimensionMismatch(f"Omega must be {q}x{q}, got {omega.shape}")

    mu_eps = pinv @ (r - G @ f.c)
    psi_eps = pinv @ (omega - G @ G.T) @ pinv.T
    psi_eps = 0.5 * (psi_eps + psi_eps.T)
    factor = psd_factor(np.eye(nh) + psi_eps)
    mu_y = f.solve(f.c + mu_eps)
    logger.debug("Conditional moments: %d restrictions, shock factor rank %d", q, factor.shape[1])
    return ConditionalMoments(mu_y, mu_eps, psi_eps, factor)
