from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from src.core.errors import DimensionMismatch, NotPositiveDefinite, SingularA0, ValidationError

SPD_TOL = 1e-10


def _as_lags(lags: np.ndarray | list[np.ndarray], n: int) -> np.ndarray:
    arr = np.asarray(lags, dtype=float)
    if arr.ndim == 2 and arr.shape == (n, n):
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != (n, n):
        raise DimensionMismatch(f"lag matrices must have shape (p, {n}, {n}), got {arr.shape}")
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ReducedParams:
    """Reduced-form VAR: ``y_t = b + B_1 y_{t-1} + ... + B_p y_{t-p} + e_t``, ``e_t ~ N(0, Sigma)``."""

    b: np.ndarray
    B_lags: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.b, dtype=float).ravel()
        n = b.size
        lags = _as_lags(self.B_lags, n)
        sigma = np.asarray(self.Sigma, dtype=float)
        if sigma.shape != (n, n):
            raise DimensionMismatch(f"Sigma must be {n}x{n}, got {sigma.shape}")
        if np.max(np.abs(sigma - sigma.T), initial=0.0) > SPD_TOL * max(1.0, np.max(np.abs(sigma))):
            raise NotPositiveDefinite("Sigma is not symmetric")
        object.__setattr__(self, "b", _readonly(b))
        object.__setattr__(self, "B_lags", _readonly(lags))
        object.__setattr__(self, "Sigma", _readonly(0.5 * (sigma + sigma.T)))

    @property
    def n(self) -> int:
        return self.b.size

    @property
    def p(self) -> int:
        return self.B_lags.shape[0]

    def coefficient_matrix(self) -> np.ndarray:
        """``[b, B_1, ..., B_p]'`` with shape ``(1 + n p, n)``."""
        return np.vstack([self.b[None, :]] + [bl.T for bl in self.B_lags])

    @classmethod
    def from_coefficient_matrix(cls, coefs: np.ndarray, sigma: np.ndarray) -> ReducedParams:
        coefs = np.asarray(coefs, dtype=float)
        n = coefs.shape[1]
        p = (coefs.shape[0] - 1) // n
        if coefs.shape[0] != 1 + n * p:
            raise DimensionMismatch(f"coefficient matrix of shape {coefs.shape} is not (1+np, n)")
        lags = np.stack([coefs[1 + j * n : 1 + (j + 1) * n].T for j in range(p)])
        return cls(coefs[0], lags, sigma)


@dataclass(frozen=True, eq=False)
class SvarParams:
    """
    Structural VAR ``A0 y_t = a + A_1 y_{t-1} + ... + A_p y_{t-p} + e_t``.

    Shocks are ``N(0, I)`` unless ``shock_scale`` holds the diagonal variances.
    """

    A0: np.ndarray
    a: np.ndarray
    A_lags: np.ndarray
    shock_scale: np.ndarray | None = None

    def __post_init__(self) -> None:
        a0 = np.asarray(self.A0, dtype=float)
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
            raise DimensionMismatch(f"A0 must be square, got shape {a0.shape}")
        n = a0.shape[0]
        a = np.asarray(self.a, dtype=float).ravel()
        if a.size != n:
            raise DimensionMismatch(f"intercept has {a.size} entries, expected {n}")
        if np.linalg.matrix_rank(a0) < n:
            raise SingularA0("A0 is not full rank")
        object.__setattr__(self, "A0", _readonly(a0))
        object.__setattr__(self, "a", _readonly(a))
        object.__setattr__(self, "A_lags", _readonly(_as_lags(self.A_lags, n)))
        if self.shock_scale is not None:
            scale = np.asarray(self.shock_scale, dtype=float).ravel()
            if scale.size != n:
                raise DimensionMismatch(f"shock_scale has {scale.size} entries, expected {n}")
            if np.any(scale <= 0.0):
                raise ValidationError("shock_scale entries must be strictly positive")
            object.__setattr__(self, "shock_scale", _readonly(scale))

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @property
    def p(self) -> int:
        return self.A_lags.shape[0]

    def to_reduced(self) -> ReducedParams:
        """Inverse map: ``B_j = A0^{-1} A_j``, ``Sigma = A0^{-1} D A0^{-1}'``."""
        a0_inv = np.linalg.inv(self.A0)
        d = np.ones(self.n) if self.shock_scale is None else self.shock_scale
        sigma = (a0_inv * d) @ a0_inv.T
        lags = np.stack([a0_inv @ aj for aj in self.A_lags]) if self.p else self.A_lags
        return ReducedParams(a0_inv @ self.a, lags, sigma)


def reduced_to_structural(r: ReducedParams) -> SvarParams:
    """
    Structural form with ``A0`` the inverse lower Cholesky factor of ``Sigma``.

    Raises:
        NotPositiveDefinite: Sigma is not positive definite
    """
    try:
        chol = linalg.cholesky(r.Sigma, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Sigma is not positive definite: {e}") from e
    a0 = linalg.solve_triangular(chol, np.eye(r.n), lower=True)
    lags = np.stack([a0 @ bj for bj in r.B_lags]) if r.p else r.B_lags
    return SvarParams(a0, a0 @ r.b, lags)


def companion_matrix(b_lags: np.ndarray) -> np.ndarray:
    """VAR(1) companion form of ``B_1..B_p``."""
    p, n, _ = b_lags.shape
    comp = np.zeros((n * p, n * p))
    comp[:n] = np.hstack(list(b_lags))
    if p > 1:
        comp[n:, : n * (p - 1)] = np.eye(n * (p - 1))
    return comp


def is_stable(b_lags: np.ndarray) -> bool:
    if b_lags.shape[0] == 0:
        return True
    return bool(np.max(np.abs(np.linalg.eigvals(companion_matrix(b_lags)))) < 1.0)
