"""Timing harness for the conditional forecast samplers."""

from __future__ import annotations

import logging
import os
import time
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import psutil

from src.cond.constraints import ConstraintSet, EqualityRows, InequalityRows
from src.cond.draws import ForecastDraws
from src.cond.pipeline import forecast_over_draws
from src.cond.samplers import METHOD_GIBBS, METHOD_NAIVE, METHOD_TILTED
from src.core.errors import BudgetExhausted, DrawFailure, ValidationError
from src.core.rng import child_seed
from src.db.config import BenchConfig
from src.est.niw import gibbs_niw
from src.est.posterior import PosteriorDraws
from src.linalg.selection import SelectionMatrix
from src.sim.dgp import DgpSpec, generate_dgp
from src.sim.oracle import DenseEqualitySampler

logger = logging.getLogger("condcast.sim.bench")

KIND_EQUALITY = "equality"
KIND_INEQUALITY = "inequality"

METHOD_PRECISION = "precision"
METHOD_DENSE = "dense"

BENCH_COLUMNS = ["method", "n", "p", "h", "n_o", "seconds", "draws_per_sec", "violations"]
# Half-width of the inequality band around the recent sample mean
INEQUALITY_HALF_WIDTH = 0.1

GRID_SIZES = ((8, 5), (15, 20), (40, 30))
GRID_N_O = (1, 3, 5)
GRID_LAGS = (2, 4)


@dataclass(frozen=True)
class BenchResult:
    """Timing of one method on one configuration."""

    method: str
    n: int
    p: int
    h: int
    n_o: int
    seconds: float
    draws_per_sec: float
    violations: int

    def to_row(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BenchCase:
    """Data, parameters and constraints of one benchmark cell."""

    config: BenchConfig
    posterior: PosteriorDraws
    history: np.ndarray
    constraints: ConstraintSet


def full_grid(kind: str = KIND_EQUALITY) -> list[BenchConfig]:
    """Three system sizes x ``n_o`` in {1, 3, 5} x ``p`` in {2, 4}."""
    if kind not in (KIND_EQUALITY, KIND_INEQUALITY):
        raise ValidationError(f"unknown benchmark kind {kind!r}")
    return [
        BenchConfig(n=n, p=p, h=h, n_o=n_o)
        for n, h in GRID_SIZES
        for p in GRID_LAGS
        for n_o in GRID_N_O
    ]


def constrained_indices(n: int, h: int, n_o: int) -> np.ndarray:
    """Stacked coordinates of the first ``n_o`` variables over the whole horizon, ascending."""
    return np.sort(np.array([j + n * k for k in range(h) for j in range(n_o)], dtype=int))


def build_case(
    config: BenchConfig,
    kind: str,
    n_draws: int,
    T: int = 300,
    seed: int = 0,
    param_source: str = "truth",
    burn_in: int = 200,
) -> BenchCase:
    """
    Simulate data for ``config`` and set up its constraints.

    Equality rows pin the first ``n_o`` variables to the held-out simulated
    path. Inequality rows keep them within 0.1 of their mean over periods
    ``T - h`` to ``T``, the last ``h + 1`` in-sample observations.
    """
    n, p, h, n_o = config.n, config.p, config.h, config.n_o
    if n_o > n:
        raise ValidationError(f"n_o={n_o} exceeds n={n}")
    truth, data = generate_dgp(DgpSpec(n=n, p=p, T=T, seed=seed, holdout=h))
    sample, future = data[:T], data[T : T + h]
    history = sample[T - p :]

    if param_source == "truth":
        posterior = PosteriorDraws((truth,) * n_draws, info={"source": "truth"})
    elif param_source == "posterior":
        posterior = gibbs_niw(sample, p, n_draws=n_draws, burn_in=burn_in, seed=seed)
    else:
        raise ValidationError(f"unknown parameter source {param_source!r}")

    idx = constrained_indices(n, h, n_o)
    selection = SelectionMatrix.from_indices(idx, n * h)
    if kind == KIND_EQUALITY:
        constraints = ConstraintSet(EqualityRows(selection, future.ravel()[idx]))
    elif kind == KIND_INEQUALITY:
        centre = np.tile(sample[T - h - 1 :].mean(axis=0), h)[idx]
        constraints = ConstraintSet(
            inequality=InequalityRows(
                selection, centre - INEQUALITY_HALF_WIDTH, centre + INEQUALITY_HALF_WIDTH
            )
        )
    else:
        raise ValidationError(f"unknown benchmark kind {kind!r}")
    return BenchCase(config, posterior, history, constraints)


def _dense_run(case: BenchCase, seed: int) -> ForecastDraws:
    eq = case.constraints.equality
    sampler = DenseEqualitySampler(eq.selection, eq.values)
    h = case.config.h
    parts = []
    for i, params in enumerate(case.posterior):
        rng = np.random.Generator(np.random.PCG64(child_seed(seed, i)))
        parts.append(sampler.sample(params, case.history, h, 1, rng))
    return ForecastDraws.concat(parts, seed_entropy=seed)


def _runner(case: BenchCase, method: str, seed: int) -> Callable[[], ForecastDraws]:
    h = case.config.h
    if method == METHOD_DENSE:
        return lambda: _dense_run(case, seed)
    truncation = {
        METHOD_PRECISION: METHOD_TILTED,
        METHOD_GIBBS: METHOD_GIBBS,
        METHOD_NAIVE: METHOD_NAIVE,
    }[method]
    return lambda: forecast_over_draws(
        case.posterior, case.constraints, h, case.history, 1, seed, method=truncation
    )


def time_method(case: BenchCase, method: str, repeats: int = 5, seed: int = 0) -> BenchResult:
    """One warm-up call, then the median wall time of ``repeats`` calls."""
    run = _runner(case, method, seed)
    out = run()
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        out = run()
        timings.append(time.perf_counter() - start)
    seconds = float(np.median(timings))
    cfg = case.config
    rss = psutil.Process(os.getpid()).memory_info().rss
    violations = out.count_violations(case.constraints)
    logger.info(
        "%s n=%d p=%d h=%d n_o=%d: %.4f s, rss %.1f MB, %d violations",
        method, cfg.n, cfg.p, cfg.h, cfg.n_o, seconds, rss / 2**20, violations,
    )
    return BenchResult(
        method=method,
        n=cfg.n,
        p=cfg.p,
        h=cfg.h,
        n_o=cfg.n_o,
        seconds=seconds,
        draws_per_sec=out.n_draws / seconds if seconds > 0 else float("inf"),
        violations=violations,
    )


def methods_for(kind: str, include_naive: bool = False) -> list[str]:
    if kind == KIND_EQUALITY:
        return [METHOD_PRECISION, METHOD_DENSE]
    methods = [METHOD_PRECISION, METHOD_GIBBS]
    if include_naive:
        methods.append(METHOD_NAIVE)
    return methods


def run_benchmark(
    suite: Iterable[BenchConfig],
    kind: str = KIND_EQUALITY,
    n_draws: int = 1000,
    repeats: int = 5,
    T: int = 300,
    seed: int = 0,
    include_naive: bool = False,
    param_source: str = "truth",
    burn_in: int = 200,
) -> list[BenchResult]:
    """
    Time every method of ``kind`` on every configuration of ``suite``.

    Cells run one after another. Parameter draws are prepared before timing
    starts; the timed call covers forecasting only. A naive run that exhausts
    its proposal budget is skipped with a warning.
    """
    results: list[BenchResult] = []
    for config in suite:
        case = build_case(config, kind, n_draws, T, seed, param_source, burn_in)
        for method in methods_for(kind, include_naive):
            try:
                results.append(time_method(case, method, repeats, seed))
            except DrawFailure as e:
                if method == METHOD_NAIVE and isinstance(e.cause, BudgetExhausted):
                    logger.warning("Naive sampler skipped for %s: %s", config.to_dict(), e.cause)
                    continue
                raise
    return results


def bench_table(results: Iterable[BenchResult]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in results], columns=BENCH_COLUMNS)


def write_bench_table(results: Iterable[BenchResult], path: Path | str) -> Path:
    """CSV with header ``method,n,p,h,n_o,seconds,draws_per_sec,violations``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    bench_table(results).to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
    logger.info("Benchmark table written to %s", path)
    return path
