from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg, special

from src.core.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InsufficientData,
    InvalidPrior,
    NotPositiveDefinite,
    ValidationError,
)
from src.core.rng import as_seed_sequence
from src.est.niw import build_regressors
from src.est.posterior import PosteriorDraws
from src.var.params import SvarParams

logger = logging.getLogger("condcast.est.acp")

INTERCEPT_VARIANCE = 100.0
_LOG_2PI = math.log(2.0 * math.pi)


def ar_residual_variances(data: np.ndarray, p: int) -> np.ndarray:
    """
    Residual variance of an OLS AR(p) with intercept on every series.

    The variance is corrected for the ``p + 1`` estimated coefficients.

    Raises:
        InsufficientData: fewer than ``2p + 2`` observations
        InvalidPrior: a series is fitted exactly
    """
    data = np.asarray(data, dtype=float)
    T, n = data.shape
    if T - p <= p + 1:
        raise InsufficientData(f"{T} observations are too few for AR({p}) residual variances")
    s_sq = np.empty(n)
    for i in range(n):
        y, X = build_regressors(data[:, [i]], p)
        coefs, *_ = linalg.lstsq(X, y[:, 0])
        resid = y[:, 0] - X @ coefs
        s_sq[i] = resid @ resid / (resid.size - (p + 1))
    if np.any(s_sq <= 0.0):
        bad = int(np.flatnonzero(s_sq <= 0.0)[0])
        raise InvalidPrior(f"series {bad} has zero AR({p}) residual variance")
    return s_sq


@dataclass(frozen=True, eq=False)
class AcpPrior:
    """
    Asymmetric conjugate Minnesota prior for the triangular structural VAR.

    Equation ``i`` (0-based) has coefficients ``theta_i = (alpha_i, beta_i)``:
    ``alpha_i`` holds the ``i`` free entries of row ``i`` of ``A0`` and
    ``beta_i = (a_i, lag 1 row, ..., lag p row)``. The prior is
    ``theta_i | sigma2_i ~ N(m_i, sigma2_i V_i)`` and
    ``sigma2_i ~ IG((v0 + i + 1 - n) / 2, s_sq[i] / 2)``.
    """

    kappa1: float
    kappa2: float
    s_sq: np.ndarray
    p: int
    v0: float | None = None
    intercept_var: float = INTERCEPT_VARIANCE
    own_lag_mean: float = 1.0

    def __post_init__(self) -> None:
        s_sq = np.asarray(self.s_sq, dtype=float).ravel()
        s_sq.setflags(write=False)
        object.__setattr__(self, "s_sq", s_sq)
        if self.v0 is None:
            object.__setattr__(self, "v0", float(s_sq.size + 2))
        if not (self.kappa1 > 0.0 and self.kappa2 > 0.0):
            raise InvalidPrior(f"shrinkage must be positive, got ({self.kappa1}, {self.kappa2})")
        if np.any(~np.isfinite(s_sq)) or np.any(s_sq <= 0.0):
            raise InvalidPrior("AR residual variances must be strictly positive")
        if self.p < 1:
            raise InvalidPrior(f"lag order must be at least 1, got {self.p}")
        if self.intercept_var <= 0.0:
            raise InvalidPrior("intercept prior variance must be positive")
        if self.shape(0) <= 0.0:
            raise InvalidPrior(
                f"inverse-gamma shape (v0 + 1 - n)/2 = {self.shape(0)} is not positive for v0={self.v0}"
            )

    @classmethod
    def from_data(
        cls, data: np.ndarray, p: int, kappa1: float, kappa2: float, **kwargs
    ) -> AcpPrior:
        return cls(kappa1, kappa2, ar_residual_variances(data, p), p, **kwargs)

    @property
    def n(self) -> int:
        return self.s_sq.size

    def with_kappa(self, kappa1: float, kappa2: float) -> AcpPrior:
        return dataclasses.replace(self, kappa1=kappa1, kappa2=kappa2)

    def shape(self, i: int) -> float:
        """Inverse-gamma shape of equation ``i`` (0-based)."""
        return (self.v0 + i + 1 - self.n) / 2.0

    def rate(self, i: int) -> float:
        return self.s_sq[i] / 2.0

    def equation_prior(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Prior mean and diagonal of ``V_i`` for ``theta_i = (alpha_i, beta_i)``."""
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"equation {i} outside 0..{self.n - 1}")
        k_beta = 1 + self.n * self.p
        mean = np.zeros(i + k_beta)
        mean[i + 1 + i] = self.own_lag_mean
        var = np.empty(i + k_beta)
        var[:i] = 1.0 / self.s_sq[:i]
        var[i:] = [minnesota_variance(self, i, k) for k in range(k_beta)]
        return mean, var


def minnesota_variance(prior: AcpPrior, i: int, k: int) -> float:
    """
    Prior variance factor of coefficient ``k`` of ``beta_i``.

    ``k = 0`` is the intercept; ``k = 1 + (l - 1) n + j`` is lag ``l`` of variable ``j``.

    Raises:
        IndexOutOfRange: ``i`` or ``k`` outside the equation
    """
    n, p = prior.n, prior.p
    if not 0 <= i < n:
        raise IndexOutOfRange(f"equation {i} outside 0..{n - 1}")
    if not 0 <= k <= n * p:
        raise IndexOutOfRange(f"coefficient {k} outside 0..{n * p}")
    if k == 0:
        return prior.intercept_var
    lag, j = divmod(k - 1, n)
    lag += 1
    if j == i:
        return prior.kappa1 / (lag**2 * prior.s_sq[i])
    return prior.kappa2 / (lag**2 * prior.s_sq[j])


@dataclass(frozen=True, eq=False)
class AcpEquationPosterior:
    """Normal-inverse-gamma posterior ``theta | sigma2 ~ N(mean, sigma2 precision^-1)``, ``sigma2 ~ IG(shape, rate)``."""

    mean: np.ndarray
    precision: np.ndarray
    shape: float
    rate: float

    @cached_property
    def cholesky(self) -> np.ndarray:
        try:
            return linalg.cholesky(self.precision, lower=True)
        except linalg.LinAlgError as e:
            raise NotPositiveDefinite(f"posterior precision is not positive definite: {e}") from e


@dataclass(frozen=True)
class _CrossProducts:
    xtx: np.ndarray
    xty: np.ndarray
    yty: float
    rows: int

    @classmethod
    def of(cls, y: np.ndarray, x: np.ndarray) -> _CrossProducts:
        return cls(x.T @ x, x.T @ y, float(y @ y), y.size)


def _nig_update(
    cp: _CrossProducts, mean: np.ndarray, var: np.ndarray, shape: float, rate: float
) -> tuple[AcpEquationPosterior, float]:
    prior_prec = 1.0 / var
    K = cp.xtx + np.diag(prior_prec)
    try:
        chol = linalg.cholesky(K, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"posterior precision is not positive definite: {e}") from e
    shifted = prior_prec * mean + cp.xty
    post_mean = linalg.cho_solve((chol, True), shifted)
    post_shape = shape + cp.rows / 2.0
    post_rate = rate + 0.5 * (cp.yty + mean @ (prior_prec * mean) - post_mean @ shifted)
    if post_rate <= 0.0:
        raise NotPositiveDefinite(f"posterior inverse-gamma rate {post_rate} is not positive")

    log_ml = (
        -0.5 * cp.rows * _LOG_2PI
        - 0.5 * np.sum(np.log(var))
        - np.sum(np.log(np.diag(chol)))
        + shape * math.log(rate)
        - post_shape * math.log(post_rate)
        + special.gammaln(post_shape)
        - special.gammaln(shape)
    )
    posterior = AcpEquationPosterior(post_mean, K, post_shape, post_rate)
    return posterior, float(log_ml)


def equation_regressors(Y: np.ndarray, X: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Target and regressors ``x_it = (-y_{0t}, ..., -y_{i-1,t}, 1, lags)`` of equation ``i``."""
    return Y[:, i], np.hstack([-Y[:, :i], X])


def acp_equation_posterior(
    y: np.ndarray, x: np.ndarray, mean: np.ndarray, var: np.ndarray, shape: float, rate: float
) -> AcpEquationPosterior:
    """Conjugate update of one equation; zero rows return the prior."""
    return _nig_update(_CrossProducts.of(y, x), mean, var, shape, rate)[0]


def acp_equation_log_ml(
    y: np.ndarray, x: np.ndarray, mean: np.ndarray, var: np.ndarray, shape: float, rate: float
) -> float:
    """Log marginal likelihood of one normal-inverse-gamma regression."""
    return _nig_update(_CrossProducts.of(y, x), mean, var, shape, rate)[1]


@dataclass(frozen=True, eq=False)
class AcpPosterior:
    """Per-equation posteriors of the triangular system, equation ``i`` has ``i`` alpha terms."""

    equations: tuple[AcpEquationPosterior, ...]
    prior: AcpPrior
    log_ml: float

    @property
    def n(self) -> int:
        return len(self.equations)

    @property
    def p(self) -> int:
        return self.prior.p


class AcpEvaluator:
    """
    Cached cross-products of one sample, so the marginal likelihood can be
    evaluated for many shrinkage values cheaply.
    """

    def __init__(self, data: np.ndarray, prior: AcpPrior):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != prior.n:
            raise DimensionMismatch(f"data must have {prior.n} columns, got shape {data.shape}")
        T, n = data.shape
        if T <= n * prior.p + n:
            raise InsufficientData(
                f"{T} observations, need more than {n * prior.p + n} for n={n}, p={prior.p}"
            )
        self.prior = prior
        Y, X = build_regressors(data, prior.p)
        self.T = Y.shape[0]
        self._cross = [_CrossProducts.of(*equation_regressors(Y, X, i)) for i in range(n)]

    def _equation(self, prior: AcpPrior, i: int) -> tuple[AcpEquationPosterior, float]:
        mean, var = prior.equation_prior(i)
        return _nig_update(self._cross[i], mean, var, prior.shape(i), prior.rate(i))

    def equation_log_ml(self, i: int, kappa1: float | None = None, kappa2: float | None = None) -> float:
        return self._equation(self._with(kappa1, kappa2), i)[1]

    def log_ml(self, kappa1: float | None = None, kappa2: float | None = None) -> float:
        prior = self._with(kappa1, kappa2)
        return sum(self._equation(prior, i)[1] for i in range(prior.n))

    def posterior(self, kappa1: float | None = None, kappa2: float | None = None) -> AcpPosterior:
        prior = self._with(kappa1, kappa2)
        results = [self._equation(prior, i) for i in range(prior.n)]
        return AcpPosterior(
            tuple(r[0] for r in results), prior, float(sum(r[1] for r in results))
        )

    def _with(self, kappa1: float | None, kappa2: float | None) -> AcpPrior:
        if kappa1 is None and kappa2 is None:
            return self.prior
        k1 = self.prior.kappa1 if kappa1 is None else kappa1
        k2 = self.prior.kappa2 if kappa2 is None else kappa2
        return self.prior.with_kappa(k1, k2)


def acp_posterior(data: np.ndarray, p: int, prior: AcpPrior) -> AcpPosterior:
    """
    Equation-by-equation conjugate posterior of the triangular structural VAR.

    Raises:
        InsufficientData: ``T <= n p + n``
        NotPositiveDefinite: a posterior precision lost definiteness
    """
    if prior.p != p:
        raise DimensionMismatch(f"prior built for p={prior.p}, requested p={p}")
    posterior = AcpEvaluator(data, prior).posterior()
    logger.info(
        "ACP posterior: n=%d, p=%d, kappa=(%.4g, %.4g), log-ML %.2f",
        prior.n,
        p,
        prior.kappa1,
        prior.kappa2,
        posterior.log_ml,
    )
    return posterior


def acp_log_marginal_likelihood(data: np.ndarray, p: int, prior: AcpPrior) -> float:
    """Closed-form log marginal likelihood, the sum of the per-equation terms."""
    if prior.p != p:
        raise DimensionMismatch(f"prior built for p={prior.p}, requested p={p}")
    return AcpEvaluator(data, prior).log_ml()


def acp_draw_params(
    posterior: AcpPosterior, n_draws: int, seed: int | np.random.SeedSequence | None = None
) -> PosteriorDraws:
    """
    Independent exact draws: ``sigma2_i`` from the inverse-gamma, then ``theta_i``
    from the conditional Gaussian, assembled into structural parameters with a
    unit lower-triangular ``A0`` and ``shock_scale = sigma2``.
    """
    if n_draws < 1:
        raise ValidationError(f"n_draws must be positive, got {n_draws}")
    ss = as_seed_sequence(seed)
    rng = np.random.Generator(np.random.PCG64(ss))
    n, p = posterior.n, posterior.p

    A0 = np.broadcast_to(np.eye(n), (n_draws, n, n)).copy()
    a = np.empty((n_draws, n))
    A_lags = np.empty((n_draws, p, n, n))
    scale = np.empty((n_draws, n))
    for i, eq in enumerate(posterior.equations):
        sigma2 = 1.0 / rng.gamma(eq.shape, 1.0 / eq.rate, size=n_draws)
        z = rng.standard_normal((eq.mean.size, n_draws))
        theta = eq.mean[:, None] + linalg.solve_triangular(eq.cholesky.T, z) * np.sqrt(sigma2)
        A0[:, i, :i] = theta[:i].T
        beta = theta[i:].T
        a[:, i] = beta[:, 0]
        A_lags[:, :, i, :] = beta[:, 1:].reshape(n_draws, p, n)
        scale[:, i] = sigma2

    draws = tuple(SvarParams(A0[d], a[d], A_lags[d], scale[d]) for d in range(n_draws))
    logger.info("Drew %d ACP parameter sets (n=%d, p=%d)", n_draws, n, p)
    return PosteriorDraws(
        draws,
        root_entropy=int(ss.entropy),
        info={
            "prior": "acp",
            "kappa1": posterior.prior.kappa1,
            "kappa2": posterior.prior.kappa2,
            "log_ml": posterior.log_ml,
        },
    )
