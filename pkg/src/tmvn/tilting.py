from __future__ import annotations

import logging
import math

import numpy as np

from src.core.errors import (
    BudgetExhausted,
    NotPositiveDefinite,
    RegionTooImprobable,
    TiltingDiverged,
)
from src.core.rng import SeedLike, as_generator
from src.tmvn.spec import TmvnResult, TruncatedGaussianSpec, move_inside
from src.tmvn.univariate import ln_normal_prob, trandn

logger = logging.getLogger("condcast.tmvn.tilting")

NEWTON_MAX_ITER = 200
NEWTON_TOL = 1e-8
STALL_TOL = 1e-6
# ln(1e-300)
MIN_LOG_PROB = math.log(1e-300)
# Tiny pivot used when the permuted Cholesky meets a rounding-negative Schur complement
PIVOT_FLOOR = 1e-15
WARN_ROUNDS = 1_000
MAX_ROUNDS = 10_000

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _colperm(
    cov: np.ndarray, lb: np.ndarray, ub: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Pivoted Cholesky that orders variables by smallest conditional box probability.

    Returns:
        ``(L, perm, lb, ub)`` with ``L L' = cov[perm][:, perm]`` and permuted bounds
    """
    d = cov.shape[0]
    cov = cov.copy()
    lb = lb.copy()
    ub = ub.copy()
    perm = np.arange(d)
    L = np.zeros((d, d))
    z = np.zeros(d)

    for j in range(d):
        rest = np.arange(j, d)
        s = np.diag(cov)[rest] - np.sum(L[rest, :j] ** 2, axis=1)
        s = np.sqrt(np.maximum(s, PIVOT_FLOOR))
        shift = L[rest, :j] @ z[:j]
        pr = ln_normal_prob((lb[rest] - shift) / s, (ub[rest] - shift) / s)
        k = j + int(np.argmin(pr))

        jk, kj = [j, k], [k, j]
        cov[jk, :] = cov[kj, :]
        cov[:, jk] = cov[:, kj]
        L[jk, :] = L[kj, :]
        lb[jk] = lb[kj]
        ub[jk] = ub[kj]
        perm[jk] = perm[kj]

        s = cov[j, j] - L[j, :j] @ L[j, :j]
        if s < -0.01 * max(1.0, cov[j, j]):
            raise NotPositiveDefinite("covariance is not positive semi-definite")
        L[j, j] = math.sqrt(max(s, PIVOT_FLOOR))
        L[j + 1 :, j] = (cov[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]

        shift = L[j, :j] @ z[:j]
        tl = (lb[j] - shift) / L[j, j]
        tu = (ub[j] - shift) / L[j, j]
        w = ln_normal_prob(tl, tu)
        z[j] = (np.exp(-0.5 * tl**2 - w) - np.exp(-0.5 * tu**2 - w)) / _SQRT_2PI

    return L, perm, lb, ub


class TiltedSampler:
    """
    Accept-reject sampler with a minimax exponentially tilted proposal.

    The setup (variable ordering, scaled Cholesky factor, saddle point and the
    bound ``psistar``) is computed once and can be shared across threads: every
    ``sample`` call takes its own generator.
    """

    def __init__(self, spec: TruncatedGaussianSpec):
        self.spec = spec
        self.dim = spec.dim
        d = self.dim

        lb = spec.lower - spec.mean
        ub = spec.upper - spec.mean
        unscaled, self.perm, lb, ub = _colperm(np.array(spec.covariance), lb, ub)
        diag = np.diag(unscaled).copy()

        self.unscaled_L = unscaled
        self.lb = lb / diag
        self.ub = ub / diag
        # Scaled factor with the unit diagonal removed
        self.L = unscaled / diag[:, None] - np.eye(d)

        if d > 1:
            solution, iterations = self._solve_saddle_point()
            self.x = solution[: d - 1]
            self.mu = solution[d - 1 :]
            logger.debug("Tilting saddle point found in %d Newton iterations (d=%d)", iterations, d)
        else:
            self.x = np.zeros(0)
            self.mu = np.zeros(0)

        self.psistar = float(self._psy(self.x, self.mu))
        if self.psistar < MIN_LOG_PROB:
            raise RegionTooImprobable(
                f"truncation region log-probability bound {self.psistar:.1f} below ln(1e-300)"
            )

    @property
    def log_probability_upper_bound(self) -> float:
        """Upper bound on ``ln P(lower < X < upper)`` implied by the tilting."""
        return self.psistar

    @property
    def order(self) -> np.ndarray:
        """Inverse of ``perm``: maps permuted coordinates back to the original order."""
        return np.argsort(self.perm)

    def _pad(self, v: np.ndarray) -> np.ndarray:
        return np.concatenate([v, [0.0]])

    def _psy(self, x: np.ndarray, mu: np.ndarray) -> float:
        x = self._pad(x)
        mu = self._pad(mu)
        c = self.L @ x
        lt = self.lb - mu - c
        ut = self.ub - mu - c
        return float(np.sum(ln_normal_prob(lt, ut) + 0.5 * mu**2 - x * mu))

    def _gradpsi(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = self.dim
        L = self.L
        x = np.zeros(d)
        mu = np.zeros(d)
        x[: d - 1] = y[: d - 1]
        mu[: d - 1] = y[d - 1 :]

        c = L @ x
        lt = self.lb - mu - c
        ut = self.ub - mu - c

        w = ln_normal_prob(lt, ut)
        pl = np.exp(-0.5 * lt**2 - w) / _SQRT_2PI
        pu = np.exp(-0.5 * ut**2 - w) / _SQRT_2PI
        P = pl - pu

        dfdx = -mu[: d - 1] + P @ L[:, : d - 1]
        dfdm = mu - x + P
        grad = np.concatenate([dfdx, dfdm[:-1]])

        lt = np.where(np.isinf(lt), 0.0, lt)
        ut = np.where(np.isinf(ut), 0.0, ut)
        dP = -(P**2) + lt * pl - ut * pu
        DL = dP[:, None] * L
        mx = (DL - np.eye(d))[:-1, :-1]
        xx = (L.T @ DL)[:-1, :-1]
        J = np.block([[xx, mx.T], [mx, np.diag(1.0 + dP[:-1])]])
        return grad, J

    def _solve_saddle_point(self) -> tuple[np.ndarray, int]:
        """
        Damped Newton iteration on the gradient of psi.

        Raises:
            TiltingDiverged: no convergence within the iteration budget
        """
        y = np.zeros(2 * (self.dim - 1))
        grad, jac = self._gradpsi(y)
        norm = float(np.linalg.norm(grad))
        for iteration in range(NEWTON_MAX_ITER):
            if norm <= NEWTON_TOL:
                return y, iteration
            try:
                step = np.linalg.solve(jac, -grad)
            except np.linalg.LinAlgError as e:
                raise TiltingDiverged(f"singular Jacobian at Newton iteration {iteration}") from e

            t = 1.0
            while True:
                candidate = y + t * step
                cand_grad, cand_jac = self._gradpsi(candidate)
                cand_norm = float(np.linalg.norm(cand_grad))
                if np.isfinite(cand_norm) and cand_norm < norm:
                    break
                t *= 0.5
                if t < 1e-12:
                    # Rounding floor reached close to the root
                    if norm <= STALL_TOL:
                        return y, iteration
                    raise TiltingDiverged(
                        f"step halving stalled at iteration {iteration}, gradient norm {norm:.3e}"
                    )
            y, grad, jac, norm = candidate, cand_grad, cand_jac, cand_norm

        if norm <= NEWTON_TOL:
            return y, NEWTON_MAX_ITER
        raise TiltingDiverged(
            f"no convergence after {NEWTON_MAX_ITER} iterations, gradient norm {norm:.3e}"
        )

    def _propose(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Sequential tilted proposals ``Z`` (``d x n``) and their log-likelihood ratios."""
        mu = self._pad(self.mu)
        Z = np.zeros((self.dim, n))
        logpr = np.zeros(n)
        for k in range(self.dim):
            col = self.L[k, :k] @ Z[:k, :]
            tl = self.lb[k] - mu[k] - col
            tu = self.ub[k] - mu[k] - col
            Z[k, :] = mu[k] + trandn(tl, tu, rng)
            logpr += ln_normal_prob(tl, tu) + 0.5 * mu[k] ** 2 - mu[k] * Z[k, :]
        return logpr, Z

    def sample(self, n_draws: int, seed: SeedLike = None) -> TmvnResult:
        """
        Draw ``n_draws`` exact samples.

        Raises:
            BudgetExhausted: acceptance too rare to finish within the round budget
        """
        rng = as_generator(seed)
        accepted: list[np.ndarray] = []
        n_accepted = 0
        n_proposals = 0
        rounds = 0
        while n_accepted < n_draws:
            batch = n_draws - n_accepted
            logpr, Z = self._propose(batch, rng)
            ok = -np.log(rng.random(batch)) > self.psistar - logpr
            accepted.append(Z[:, ok])
            n_accepted += int(ok.sum())
            n_proposals += batch
            rounds += 1
            if rounds == WARN_ROUNDS:
                logger.warning(
                    "Tilted acceptance below 0.001 (d=%d, %d proposals)", self.dim, n_proposals
                )
            elif rounds >= MAX_ROUNDS:
                raise BudgetExhausted(
                    f"only {n_accepted} of {n_draws} tilted draws accepted in {n_proposals} proposals"
                )

        Z = np.concatenate(accepted, axis=1)[:, :n_draws]
        draws = (self.unscaled_L @ Z)[self.order].T + self.spec.mean
        draws = move_inside(draws, self.spec.lower, self.spec.upper)
        rate = n_accepted / n_proposals if n_proposals else 1.0
        logger.debug("Tilted sampler: d=%d, acceptance rate %.4f", self.dim, rate)
        return TmvnResult(draws=draws, acceptance_rate=rate, n_proposals=n_proposals)


def sample_tilted(spec: TruncatedGaussianSpec, n_draws: int, seed: SeedLike = None) -> TmvnResult:
    """
    Exact draws from a box-truncated Gaussian by minimax exponential tilting.

    Raises:
        TiltingDiverged: saddle-point solve failed (fall back to ``sample_gibbs``)
        RegionTooImprobable: truncation probability bound below 1e-300
    """
    return TiltedSampler(spec).sample(n_draws, seed)
