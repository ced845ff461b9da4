"""
Forecast samplers for one forecast system.

Every sampler returns ``ForecastDraws`` with one row per draw in stacked
coordinates and is deterministic given ``seed``.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg

from src.cond.constraints import (
    ConstraintSet,
    GaussianRows,
    InequalityRows,
    dense_rows,
)
from src.cond.draws import ForecastDraws
from src.cond.moments import (
    ConditionalMoments,
    conditional_moments_linear,
    pseudo_inverse,
    restriction_map,
)
from src.cond.precision import PrecisionGaussian
from src.core.errors import (
    DimensionMismatch,
    EmptyConstraint,
    OverlapEqualityInequality,
    OverlappingConstraints,
    RankDeficientStack,
    RankDeficientW,
    TiltingDiverged,
    ValidationError,
)
from src.core.rng import SeedLike, as_generator
from src.linalg.selection import SelectionMatrix
from src.tmvn import TruncatedGaussianSpec, sample_gibbs, sample_naive, sample_tilted
from src.tmvn.gibbs import DEFAULT_BURN_IN
from src.var.system import ForecastSystem

logger = logging.getLogger("condcast.cond.samplers")

METHOD_TILTED = "tilted"
METHOD_GIBBS = "gibbs"
METHOD_NAIVE = "naive"
TRUNCATION_METHODS = (METHOD_TILTED, METHOD_GIBBS, METHOD_NAIVE)
# Singular values of S H^{-1} F below this (relative) mark a pinned bounded coordinate
PINNED_TOL = 1e-8


def _entropy(seed: SeedLike) -> int | None:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.entropy)
    return None


def _result(f: ForecastSystem, draws: np.ndarray, seed: SeedLike) -> ForecastDraws:
    return ForecastDraws(draws, f.n, f.h, seed_entropy=_entropy(seed))


def sample_truncated(
    spec: TruncatedGaussianSpec,
    n_draws: int,
    rng: np.random.Generator,
    method: str = METHOD_TILTED,
    max_proposals: int = 1_000_000,
) -> np.ndarray:
    """
    ``n_draws x d`` draws of a box-truncated Gaussian.

    The tilted sampler falls back to Gibbs when its saddle-point solve diverges.
    """
    if method == METHOD_GIBBS:
        return sample_gibbs(spec, n_draws, burn_in=DEFAULT_BURN_IN, seed=rng).draws
    if method == METHOD_NAIVE:
        return sample_naive(spec, n_draws, max_proposals=max_proposals, seed=rng).draws
    if method != METHOD_TILTED:
        raise ValidationError(
            f"unknown truncation method {method!r}, use one of {TRUNCATION_METHODS}"
        )
    try:
        return sample_tilted(spec, n_draws, seed=rng).draws
    except TiltingDiverged as e:
        logger.warning(
            "Tilting failed (%s), falling back to Gibbs with burn-in %d", e, DEFAULT_BURN_IN
        )
        return sample_gibbs(spec, n_draws, burn_in=DEFAULT_BURN_IN, seed=rng).draws


def unconditional_gaussian(f: ForecastSystem) -> PrecisionGaussian:
    """``N(H^{-1} c, (H'H)^{-1})`` sharing the system's cached factor."""
    return PrecisionGaussian(f.solve(f.c), f.precision, f.precision_factor)


def draw_unconditional(f: ForecastSystem, n_draws: int, seed: SeedLike = None) -> ForecastDraws:
    """Exact draws ``y = H^{-1}(c + u)``, ``u ~ N(0, I)``."""
    rng = as_generator(seed)
    u = rng.standard_normal((f.dim, n_draws))
    return _result(f, f.solve(f.c[:, None] + u).T, seed)


def _marginal_conditional(
    g: PrecisionGaussian,
    indices: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    n_draws: int,
    rng: np.random.Generator,
    method: str,
) -> np.ndarray:
    # Truncated marginal of the selected block, then the banded conditional of the rest
    spec = TruncatedGaussianSpec.from_covariance(
        g.mean[indices], g.marginal_covariance(indices), lower, upper
    )
    y_o = sample_truncated(spec, n_draws, rng, method)
    return g.draw_given(indices, y_o, rng)


def draw_conditional_equality(
    f: ForecastSystem,
    R_o: SelectionMatrix,
    r_o: np.ndarray,
    n_draws: int,
    seed: SeedLike = None,
) -> ForecastDraws:
    """
    Hard conditions ``y[R_o] = r_o`` through the precision of the free coordinates.

    The free block is ``N(mu_u, K_u^{-1})`` with ``K_u = M_u' H'H M_u``; the
    constrained coordinates are set to ``r_o`` exactly.
    """
    if R_o.is_empty:
        return draw_unconditional(f, n_draws, seed)
    if R_o.n_cols != f.dim:
        raise DimensionMismatch(f"selection has {R_o.n_cols} columns, system has {f.dim}")
    rng = as_generator(seed)
    idx = R_o.indices
    values = np.asarray(r_o, dtype=float).ravel()
    if idx.size == f.dim:
        out = np.empty((n_draws, f.dim))
        out[:, idx] = values
        return _result(f, out, seed)
    draws = unconditional_gaussian(f).draw_given(idx, np.tile(values, (n_draws, 1)), rng)
    return _result(f, draws, seed)


def draw_conditional_inequality(
    f: ForecastSystem,
    S: SelectionMatrix,
    lower: np.ndarray,
    upper: np.ndarray,
    n_draws: int,
    seed: SeedLike = None,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """
    Interval conditions by the marginal-conditional decomposition.

    Stage one draws the selected block from its truncated marginal
    ``N(mu_o, M_o'(H'H)^{-1}M_o)``; stage two completes each draw from the
    banded conditional of the free coordinates.

    Raises:
        RegionTooImprobable: the box has probability below 1e-300
    """
    rng = as_generator(seed)
    if S.is_empty:
        return draw_unconditional(f, n_draws, seed)
    rows = InequalityRows(S, lower, upper)
    draws = _marginal_conditional(
        unconditional_gaussian(f), S.indices, rows.lower, rows.upper, n_draws, rng, method
    )
    return _result(f, draws, seed)


def draw_conditional_mixed(
    f: ForecastSystem,
    R_o: SelectionMatrix,
    r_o: np.ndarray,
    S: SelectionMatrix,
    lower: np.ndarray,
    upper: np.ndarray,
    n_draws: int,
    seed: SeedLike = None,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """
    Hard conditions on ``R_o`` and interval conditions on ``S`` for disjoint coordinates.

    Raises:
        OverlapEqualityInequality: a coordinate is both fixed and bounded
    """
    if R_o.is_empty:
        return draw_conditional_inequality(f, S, lower, upper, n_draws, seed, method)
    if S.is_empty:
        return draw_conditional_equality(f, R_o, r_o, n_draws, seed)
    eq_idx, ineq_idx = R_o.indices, S.indices
    both = np.intersect1d(eq_idx, ineq_idx)
    if both.size:
        raise OverlapEqualityInequality(f"coordinates {both.tolist()} are both fixed and bounded")
    rows = InequalityRows(S, lower, upper)
    rng = as_generator(seed)
    values = np.asarray(r_o, dtype=float).ravel()

    g = unconditional_gaussian(f)
    free = np.setdiff1d(np.arange(f.dim), eq_idx)
    free_law = g.condition_on(eq_idx, values)
    positions = np.searchsorted(free, ineq_idx)
    free_draws = _marginal_conditional(
        free_law, positions, rows.lower, rows.upper, n_draws, rng, method
    )
    out = np.empty((n_draws, f.dim))
    out[:, eq_idx] = values
    out[:, free] = free_draws
    return _result(f, out, seed)


def draw_conditional_linear(
    f: ForecastSystem, moments: ConditionalMoments, n_draws: int, seed: SeedLike = None
) -> ForecastDraws:
    """Draw ``eps = mu_eps + F u`` with ``F F' = I + Psi_eps`` and solve ``H y = c + eps``."""
    rng = as_generator(seed)
    u = rng.standard_normal((moments.rank, n_draws))
    eps = moments.shock_mean_shift[:, None] + moments.cov_factor @ u
    return _result(f, f.solve(f.c[:, None] + eps).T, seed)


def draw_conditional_combined(
    f: ForecastSystem,
    gaussian: GaussianRows,
    inequality: InequalityRows,
    n_draws: int,
    seed: SeedLike = None,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """
    Variance-preserving Gaussian rows together with interval conditions.

    Draws ``N(mu_y, (H'H)^{-1})`` truncated to the box, ``mu_y`` being the mean
    implied by the Gaussian rows.

    Raises:
        ValidationError: the Gaussian rows carry an explicit Omega
        OverlappingConstraints: Gaussian rows touch a bounded coordinate
    """
    if gaussian is None or len(gaussian) == 0:
        if inequality is None:
            return draw_unconditional(f, n_draws, seed)
        return draw_conditional_inequality(
            f, inequality.selection, inequality.lower, inequality.upper, n_draws, seed, method
        )
    if not gaussian.variance_preserving:
        raise ValidationError("the combined sampler needs variance-preserving Gaussian rows")
    R = dense_rows(gaussian.R, f.dim)
    moments = conditional_moments_linear(f, R, gaussian.r, None)
    if inequality is None or len(inequality) == 0:
        return draw_conditional_linear(f, moments, n_draws, seed)
    touched = np.intersect1d(gaussian.columns(), inequality.selection.indices)
    if touched.size:
        raise OverlappingConstraints(
            f"Gaussian rows and inequality rows share coordinates {touched.tolist()}"
        )
    rng = as_generator(seed)
    g = PrecisionGaussian(moments.mu_y, f.precision, f.precision_factor)
    draws = _marginal_conditional(
        g, inequality.selection.indices, inequality.lower, inequality.upper, n_draws, rng, method
    )
    return _result(f, draws, seed)


def shocks_to_observable_restrictions(
    f: ForecastSystem,
    W: SelectionMatrix | np.ndarray,
    w_mean: np.ndarray,
    psi: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Rewrite ``W eps ~ N(w, Psi)`` as ``R y ~ N(r, Omega)``: ``R = W H``, ``r = W c + w``, ``Omega = Psi``.

    Raises:
        RankDeficientW: ``W`` is rank deficient
    """
    Wd = dense_rows(W, f.dim)
    if Wd.shape[0] == 0:
        raise EmptyConstraint("no shock rows")
    _, rank = pseudo_inverse(Wd)
    if rank < Wd.shape[0]:
        raise RankDeficientW(f"W has rank {rank} < {Wd.shape[0]} rows")
    R = (f.H.transpose() @ Wd.T).T
    r = Wd @ f.c + np.asarray(w_mean, dtype=float).ravel()
    return R, r, np.atleast_2d(np.asarray(psi, dtype=float))


def build_structural_scenario(
    f: ForecastSystem,
    R_o: np.ndarray | SelectionMatrix | None,
    r_o: np.ndarray | None,
    omega_o: np.ndarray | None,
    nondriving: SelectionMatrix,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Stack observable rows with ``W eps ~ N(0, I)`` for the non-driving shocks.

    Returns:
        ``([R_o; W H], [r_o; W c], blockdiag(Omega_o, I_w))``

    Raises:
        RankDeficientStack: the stacked rows are rank deficient
    """
    blocks_R, blocks_r, blocks_omega = [], [], []
    if R_o is not None:
        Ro = dense_rows(R_o, f.dim)
        if Ro.shape[0]:
            blocks_R.append(Ro)
            blocks_r.append(np.asarray(r_o, dtype=float).ravel())
            blocks_omega.append(
                np.zeros((Ro.shape[0],) * 2) if omega_o is None else np.atleast_2d(omega_o)
            )
    Wd = dense_rows(nondriving, f.dim)
    if Wd.shape[0]:
        blocks_R.append((f.H.transpose() @ Wd.T).T)
        blocks_r.append(Wd @ f.c)
        blocks_omega.append(np.eye(Wd.shape[0]))
    if not blocks_R:
        raise EmptyConstraint("scenario has neither observable rows nor non-driving shocks")
    R = np.vstack(blocks_R)
    _, rank = pseudo_inverse(R)
    if rank < R.shape[0]:
        raise RankDeficientStack(f"stacked scenario rows have rank {rank} < {R.shape[0]}")
    return R, np.concatenate(blocks_r), linalg.block_diag(*blocks_omega)


def assemble_linear_restrictions(
    f: ForecastSystem, constraints: ConstraintSet
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Every non-inequality block of ``constraints`` as one ``R y ~ N(r, Omega)``.

    Equality rows get ``Omega = 0``; variance-preserving Gaussian rows get
    ``R (H'H)^{-1} R'``; shock rows are mapped to observables; non-driving
    shocks turn the observable rows into a structural scenario.
    """
    blocks_R, blocks_r, blocks_omega = [], [], []
    if constraints.equality is not None:
        eq = constraints.equality
        blocks_R.append(eq.selection.to_dense())
        blocks_r.append(eq.values)
        blocks_omega.append(np.zeros((len(eq), len(eq))))
    if constraints.gaussian is not None:
        gs = constraints.gaussian
        R = dense_rows(gs.R, f.dim)
        blocks_R.append(R)
        blocks_r.append(gs.r)
        if gs.variance_preserving:
            G = restriction_map(f, R)
            blocks_omega.append(G @ G.T)
        else:
            blocks_omega.append(gs.omega)
    if constraints.shocks is not None:
        sh = constraints.shocks
        R, r, omega = shocks_to_observable_restrictions(f, sh.W, sh.mean, sh.psi)
        blocks_R.append(R)
        blocks_r.append(r)
        blocks_omega.append(omega)

    R = np.vstack(blocks_R) if blocks_R else np.zeros((0, f.dim))
    r = np.concatenate(blocks_r) if blocks_r else np.zeros(0)
    omega = linalg.block_diag(*blocks_omega) if blocks_omega else np.zeros((0, 0))
    if constraints.scenario_nondriving is not None:
        return build_structural_scenario(f, R, r, omega, constraints.scenario_nondriving)
    return R, r, omega


def draw_conditional_linear_truncated(
    f: ForecastSystem,
    R: np.ndarray,
    r: np.ndarray,
    omega: np.ndarray | None,
    inequality: InequalityRows,
    n_draws: int,
    seed: SeedLike = None,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """
    General linear restrictions together with interval conditions.

    With ``y = H^{-1}(c + mu_eps + F u)`` the bounded block is
    ``y_o = mu_o + G u``, ``G = S H^{-1} F``. ``y_o`` is drawn from its
    truncated law, then ``u | y_o`` and ``y`` follow.

    Raises:
        OverlappingConstraints: a bounded coordinate is pinned by the linear rows
    """
    moments = conditional_moments_linear(f, R, r, omega)
    if inequality is None or len(inequality) == 0:
        return draw_conditional_linear(f, moments, n_draws, seed)
    rng = as_generator(seed)
    idx = inequality.selection.indices
    HF = f.solve(moments.cov_factor)
    G = HF[idx]
    s = np.linalg.svd(G, compute_uv=False) if moments.rank >= idx.size else np.zeros(0)
    scale = max(float(np.max(np.abs(HF), initial=0.0)), 1.0)
    if s.size < idx.size or s[-1] <= PINNED_TOL * scale:
        raise OverlappingConstraints("a bounded coordinate has no variance left after the linear rows")
    gram = G @ G.T
    mu_o = moments.mu_y[idx]
    spec = TruncatedGaussianSpec.from_covariance(mu_o, gram, inequality.lower, inequality.upper)
    y_o = sample_truncated(spec, n_draws, rng, method)

    chol = linalg.cho_factor(gram, lower=True)
    A = linalg.cho_solve(chol, G).T
    z = rng.standard_normal((moments.rank, n_draws))
    u = A @ (y_o - mu_o).T + z - A @ (G @ z)
    draws = (moments.mu_y[:, None] + HF @ u).T
    draws[:, idx] = y_o
    return _result(f, draws, seed)


def structural_shocks(f: ForecastSystem, draws: np.ndarray) -> np.ndarray:
    """Recovered standardised shocks ``H y - c`` of every draw (rows)."""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    return (f.H @ draws.T).T - f.c
