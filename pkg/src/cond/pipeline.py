"""Forecasts over posterior parameter draws."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.cond.constraints import (
    KIND_COMBINED,
    KIND_EQUALITY,
    KIND_INEQUALITY,
    KIND_LINEAR,
    KIND_LINEAR_TRUNCATED,
    KIND_MIXED,
    KIND_UNCONDITIONAL,
    ConstraintSet,
)
from src.cond.draws import ForecastDraws
from src.cond.moments import conditional_moments_linear
from src.cond.samplers import (
    METHOD_TILTED,
    assemble_linear_restrictions,
    draw_conditional_combined,
    draw_conditional_equality,
    draw_conditional_inequality,
    draw_conditional_linear,
    draw_conditional_linear_truncated,
    draw_conditional_mixed,
    draw_unconditional,
    unconditional_gaussian,
)
from src.core.errors import DrawFailure, ValidationError
from src.core.rng import SeedLike, as_seed_sequence, spawn_seeds
from src.est.posterior import ParamDraw, PosteriorDraws
from src.var.params import ReducedParams, SvarParams, reduced_to_structural
from src.var.system import ForecastSystem, build_forecast_system

logger = logging.getLogger("condcast.cond.pipeline")


def _structural(params: ParamDraw) -> SvarParams:
    if isinstance(params, ReducedParams):
        return reduced_to_structural(params)
    return params


def sample_system(
    f: ForecastSystem,
    constraints: ConstraintSet,
    n_draws: int,
    seed: SeedLike = None,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """Dispatch ``constraints`` to the sampler that serves their kind."""
    kind = constraints.kind()
    eq, ineq = constraints.equality, constraints.inequality
    if kind == KIND_UNCONDITIONAL:
        return draw_unconditional(f, n_draws, seed)
    if kind == KIND_EQUALITY:
        return draw_conditional_equality(f, eq.selection, eq.values, n_draws, seed)
    if kind == KIND_INEQUALITY:
        return draw_conditional_inequality(
            f, ineq.selection, ineq.lower, ineq.upper, n_draws, seed, method
        )
    if kind == KIND_MIXED:
        return draw_conditional_mixed(
            f, eq.selection, eq.values, ineq.selection, ineq.lower, ineq.upper,
            n_draws, seed, method,
        )
    if kind == KIND_COMBINED:
        return draw_conditional_combined(f, constraints.gaussian, ineq, n_draws, seed, method)
    R, r, omega = assemble_linear_restrictions(f, constraints)
    if kind == KIND_LINEAR:
        return draw_conditional_linear(f, conditional_moments_linear(f, R, r, omega), n_draws, seed)
    if kind == KIND_LINEAR_TRUNCATED:
        return draw_conditional_linear_truncated(f, R, r, omega, ineq, n_draws, seed, method)
    raise ValidationError(f"no sampler for constraint kind {kind!r}")


def forecast_one(
    params: ParamDraw,
    history: np.ndarray,
    h: int,
    constraints: ConstraintSet,
    n_draws: int,
    seed: SeedLike = None,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """Forecast draws from a single parameter draw."""
    f = build_forecast_system(_structural(params), history, h)
    constraints.validate(f.dim)
    return sample_system(f, constraints, n_draws, seed, method)


def forecast_over_draws(
    posterior: PosteriorDraws,
    constraints: ConstraintSet,
    h: int,
    history: np.ndarray,
    n_forecast_per_param: int = 1,
    seed: int | np.random.SeedSequence | None = None,
    threads: int = 1,
    method: str = METHOD_TILTED,
) -> ForecastDraws:
    """
    ``n_forecast_per_param`` forecasts from every parameter draw.

    Draw ``i`` is seeded with child ``i`` of the root sequence (its ``spawn_key``
    included), so the result does not depend on ``threads``; rows are concatenated in parameter order.

    Raises:
        ValidationError: bad counts or a constraint set that does not fit the system
        DrawFailure: forecasting failed for one parameter draw
    """
    if n_forecast_per_param < 1:
        raise ValidationError("n_forecast_per_param must be >= 1")
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    root = as_seed_sequence(seed)
    entropy = int(root.entropy)
    children = spawn_seeds(root, len(posterior))
    constraints.validate(posterior.n * h)
    kind = constraints.kind()
    logger.info(
        "Forecasting %d parameter draws x %d (kind=%s, h=%d, threads=%d)",
        len(posterior), n_forecast_per_param, kind, h, threads,
    )

    def task(i: int) -> ForecastDraws:
        try:
            return forecast_one(
                posterior[i], history, h, constraints, n_forecast_per_param,
                np.random.Generator(np.random.PCG64(children[i])), method,
            )
        except Exception as e:
            raise DrawFailure(i, e) from e

    indices = range(len(posterior))
    if threads == 1:
        parts = [task(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(task, indices))

    labelled = [
        ForecastDraws(part.draws, part.n, part.h, param_index=np.full(part.n_draws, i))
        for i, part in enumerate(parts)
    ]
    result = ForecastDraws.concat(labelled, seed_entropy=entropy)
    logger.debug("Collected %d forecast draws", result.n_draws)
    return result


def impulse_response(
    params: ParamDraw,
    history: np.ndarray,
    h: int,
    variable: int,
    size: float = 1.0,
) -> np.ndarray:
    """
    Mean path shift when the one-step-ahead forecast of ``variable`` is raised by ``size``.

    The conditional mean given ``y[variable, 1] = E[y[variable, 1]] + size`` minus
    the unconditional mean, as an ``(h, n)`` array.
    """
    f = build_forecast_system(_structural(params), history, h)
    g = unconditional_gaussian(f)
    idx = np.array([f.index(variable, 1)])
    out = g.mean.copy()
    out[idx] = g.mean[idx] + size
    if f.dim > 1:
        free = np.setdiff1d(np.arange(f.dim), idx)
        out[free] = g.conditional_mean(idx, out[idx])
    return f.unstack(out - g.mean)
