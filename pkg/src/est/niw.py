from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from src.core.errors import (
    DimensionMismatch,
    InsufficientData,
    InvalidPrior,
    NotPositiveDefinite,
    ValidationError,
)
from src.core.rng import as_seed_sequence
from src.est.posterior import PosteriorDraws
from src.var.params import ReducedParams

logger = logging.getLogger("condcast.est.niw")


def build_regressors(data: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Split a ``T x n`` sample into targets and regressors.

    Returns:
        ``(Y, X)``: ``Y`` is ``(T - p) x n``; row ``t`` of ``X`` is
        ``(1, y_{t-1}', ..., y_{t-p}')``
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise DimensionMismatch(f"data must be a T x n matrix, got shape {data.shape}")
    T, n = data.shape
    if p < 1:
        raise DimensionMismatch(f"lag order must be at least 1, got {p}")
    if T <= p:
        raise InsufficientData(f"{T} observations cannot support {p} lags")

    X = np.empty((T - p, 1 + n * p))
    X[:, 0] = 1.0
    for lag in range(1, p + 1):
        X[:, 1 + (lag - 1) * n : 1 + lag * n] = data[p - lag : T - lag]
    return data[p:], X


def _spd_cholesky(matrix: np.ndarray, what: str) -> np.ndarray:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"{what} is not positive definite: {e}") from e


@dataclass(frozen=True, eq=False)
class NiwPrior:
    """
    Independent prior ``beta ~ N(beta_mean, beta_cov)``, ``Sigma ~ IW(iw_dof, iw_scale)``.

    ``beta`` stacks the columns of the ``(1 + np) x n`` coefficient matrix,
    equation by equation.
    """

    beta_mean: np.ndarray
    beta_cov: np.ndarray
    iw_dof: float
    iw_scale: np.ndarray

    def __post_init__(self) -> None:
        scale = np.atleast_2d(np.asarray(self.iw_scale, dtype=float))
        n = scale.shape[0]
        mean = np.asarray(self.beta_mean, dtype=float).ravel()
        cov = np.asarray(self.beta_cov, dtype=float)
        k = mean.size
        if scale.shape != (n, n):
            raise DimensionMismatch(f"iw_scale must be square, got {scale.shape}")
        if k % n or (k // n - 1) % n:
            raise DimensionMismatch(f"beta has {k} entries, not n(np+1) for n={n}")
        if cov.shape != (k, k):
            raise DimensionMismatch(f"beta_cov must be {k}x{k}, got {cov.shape}")
        if self.iw_dof <= n + 1:
            raise InvalidPrior(f"inverse-Wishart degrees of freedom {self.iw_dof} must exceed n + 1 = {n + 1}")
        _spd_cholesky(scale, "iw_scale")
        object.__setattr__(self, "beta_mean", mean)
        object.__setattr__(self, "beta_cov", cov)
        object.__setattr__(self, "iw_scale", scale)

    @classmethod
    def default(cls, n: int, p: int) -> NiwPrior:
        """``beta ~ N(0, I_k)``, ``Sigma ~ IW(n + 3, I_n)``."""
        k = n * (n * p + 1)
        return cls(np.zeros(k), np.eye(k), n + 3.0, np.eye(n))

    @property
    def n(self) -> int:
        return self.iw_scale.shape[0]

    @property
    def k(self) -> int:
        return self.beta_mean.size

    @property
    def p(self) -> int:
        return (self.k // self.n - 1) // self.n

    def beta_precision(self) -> np.ndarray:
        chol = _spd_cholesky(self.beta_cov, "beta_cov")
        inv = linalg.cho_solve((chol, True), np.eye(self.k))
        return 0.5 * (inv + inv.T)


def ols_start(Y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """OLS coefficient matrix and residual covariance used to start the chain."""
    coefs, *_ = linalg.lstsq(X, Y)
    resid = Y - X @ coefs
    dof = max(Y.shape[0] - X.shape[1], 1)
    sigma = resid.T @ resid / dof
    return coefs, sigma + 1e-10 * np.eye(Y.shape[1])


def gibbs_niw(
    data: np.ndarray,
    p: int,
    prior: NiwPrior | None = None,
    n_draws: int = 25_000,
    burn_in: int = 10_000,
    seed: int | np.random.SeedSequence | None = None,
    thin: int = 1,
) -> PosteriorDraws:
    """
    Gibbs sampler for the reduced-form VAR under an independent normal /
    inverse-Wishart prior.

    Alternates ``beta | Sigma, y`` (Gaussian regression update) and
    ``Sigma | beta, y`` (inverse-Wishart update), starting from OLS.

    Args:
        data: ``T x n`` sample, oldest row first
        p: Lag order
        prior: Defaults to ``NiwPrior.default(n, p)``
        n_draws: Number of retained draws
        burn_in: Discarded initial sweeps
        seed: Root seed
        thin: Keep every ``thin``-th sweep after the burn-in

    Returns:
        Reduced-form draws

    Raises:
        InsufficientData: ``T <= n p + 1``
        NotPositiveDefinite: a conditional precision or scale lost definiteness
    """
    data = np.asarray(data, dtype=float)
    Y, X = build_regressors(data, p)
    T, n = data.shape
    if T <= n * p + 1:
        raise InsufficientData(f"{T} observations, need more than {n * p + 1} for n={n}, p={p}")
    if n_draws < 1 or burn_in < 0 or thin < 1:
        raise ValidationError("n_draws >= 1, burn_in >= 0 and thin >= 1 are required")
    prior = prior or NiwPrior.default(n, p)
    if prior.n != n or prior.p != p:
        raise DimensionMismatch(f"prior is for (n={prior.n}, p={prior.p}), data needs ({n}, {p})")

    ss = as_seed_sequence(seed)
    rng = np.random.Generator(np.random.PCG64(ss))
    m = X.shape[1]
    t_eff = Y.shape[0]
    prior_prec = prior.beta_precision()
    prior_shift = prior_prec @ prior.beta_mean
    xtx = X.T @ X
    xty = X.T @ Y
    post_dof = prior.iw_dof + t_eff

    coefs, sigma = ols_start(Y, X)
    kept: list[ReducedParams] = []
    total = burn_in + n_draws * thin
    for sweep in range(total):
        sigma_inv = linalg.cho_solve((_spd_cholesky(sigma, "Sigma draw"), True), np.eye(n))
        K = prior_prec + np.kron(sigma_inv, xtx)
        chol_k = _spd_cholesky(K, "posterior precision of beta")
        rhs = prior_shift + (xty @ sigma_inv).ravel(order="F")
        beta_mean = linalg.cho_solve((chol_k, True), rhs)
        beta = beta_mean + linalg.solve_triangular(chol_k.T, rng.standard_normal(prior.k))
        coefs = beta.reshape((m, n), order="F")

        resid = Y - X @ coefs
        scale = prior.iw_scale + resid.T @ resid
        sigma = np.atleast_2d(
            stats.invwishart.rvs(df=post_dof, scale=scale, random_state=rng)
        ).reshape(n, n)
        sigma = 0.5 * (sigma + sigma.T)

        if sweep >= burn_in and (sweep - burn_in) % thin == thin - 1:
            kept.append(ReducedParams.from_coefficient_matrix(coefs, sigma))

    logger.info(
        "NIW Gibbs finished: n=%d, p=%d, T=%d, %d draws kept after %d burn-in sweeps",
        n,
        p,
        T,
        len(kept),
        burn_in,
    )
    return PosteriorDraws(
        tuple(kept),
        root_entropy=int(ss.entropy),
        burn_in=burn_in,
        thin=thin,
        info={"prior": "niw"},
    )
