"""Estimation and forecasting runs behind the command-line commands."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.cond import ConstraintSet, ForecastDraws, forecast_over_draws, impulse_response
from src.core.errors import ValidationError
from src.core.rng import as_seed_sequence
from src.db.config import EstimationSettings, ForecastSettings, PriorChoice
from src.est import (
    REFERENCE_SHRINKAGE,
    AcpPrior,
    NiwPrior,
    PosteriorDraws,
    acp_draw_params,
    acp_posterior,
    gibbs_niw,
    optimize_shrinkage,
)
from src.fmt.output import difference_table, irf_table, quantile_table, write_draws, write_table
from src.fmt.scenario import ScenarioFile
from src.fmt.series import Dataset

logger = logging.getLogger("condcast.core.runner")

QUANTILES_FILE = "quantiles.csv"
DRAWS_FILE = "draws.npz"
DIFFERENCE_FILE = "difference.csv"
IRF_FILE = "irf.csv"
POSTERIOR_FILE = "posterior.npz"
ESTIMATION_FILE = "estimation.json"


def shrinkage_for(data: np.ndarray, settings: EstimationSettings) -> tuple[float, float]:
    """Fixed ``(kappa1, kappa2)``, the marginal-likelihood optimum, or the reference values."""
    fixed = settings.fixed_kappa()
    if fixed is not None:
        return fixed
    if settings.optimize_kappa:
        template = AcpPrior.from_data(
            data, settings.lags, 1.0, 1.0, own_lag_mean=settings.own_lag_mean
        )
        best = optimize_shrinkage(
            data,
            settings.lags,
            template=template,
            symmetric=settings.symmetric_kappa,
            grid_size=settings.kappa_grid_size,
        )
        return best.kappa1, best.kappa2
    ref = REFERENCE_SHRINKAGE["symmetric" if settings.symmetric_kappa else "asymmetric"]
    return ref.kappa1, ref.kappa2


def estimate_posterior(data: np.ndarray, settings: EstimationSettings) -> PosteriorDraws:
    """
    Posterior parameter draws for a ``T x n`` sample.

    ``niw`` runs the Gibbs sampler of the reduced form; ``acp`` draws the
    triangular structural form exactly after choosing the shrinkage.

    Raises:
        InvalidPrior: unknown prior or invalid hyperparameters
        InsufficientData: too few observations for the lag order
    """
    settings.validate()
    data = np.asarray(data, dtype=float)
    n, p = data.shape[1], settings.lags
    logger.info("Estimating %s posterior: n=%d, p=%d, T=%d", settings.prior, n, p, data.shape[0])
    if settings.prior == PriorChoice.NIW:
        return gibbs_niw(
            data,
            p,
            NiwPrior.default(n, p),
            n_draws=settings.draws,
            burn_in=settings.burn_in,
            seed=settings.seed,
            thin=settings.thin,
        )
    kappa1, kappa2 = shrinkage_for(data, settings)
    prior = AcpPrior.from_data(data, p, kappa1, kappa2, own_lag_mean=settings.own_lag_mean)
    return acp_draw_params(acp_posterior(data, p, prior), settings.draws, settings.seed)


def forecast_seed(seed: int) -> int:
    """Root entropy of the forecast streams, distinct from the estimation seed."""
    return int(as_seed_sequence(seed).generate_state(1, np.uint64)[0])


def save_estimation(
    posterior: PosteriorDraws, data: Dataset, settings: EstimationSettings, output_dir: Path
) -> dict[str, Path]:
    """Posterior archive plus a JSON summary of the run."""
    posterior_path = output_dir / POSTERIOR_FILE
    posterior.save(posterior_path)
    summary = {
        "draws": len(posterior),
        "n": posterior.n,
        "p": posterior.p,
        "kind": posterior.kind,
        "sample": [str(data.dates[0]), str(data.dates[-1])],
        "variables": list(data.variables),
        "settings": settings.to_dict(),
        "info": posterior.info,
    }
    summary_path = output_dir / ESTIMATION_FILE
    summary_path.write_text(
        json.dumps(summary, indent=2, sort_keys=True, ensure_ascii=False, default=float) + "\n",
        encoding="utf-8",
    )
    logger.info("Saved estimation summary to %s", summary_path)
    return {"posterior": posterior_path, "estimation": summary_path}


@dataclass
class ForecastRun:
    """Draws and files of one ``forecast`` invocation."""

    constraints: ConstraintSet
    draws: ForecastDraws | None = None
    unconditional: ForecastDraws | None = None
    responses: np.ndarray | None = None
    files: dict[str, Path] = field(default_factory=dict)


def run_forecast(
    data: Dataset,
    posterior: PosteriorDraws,
    scenario: ScenarioFile,
    settings: ForecastSettings,
    output_dir: Path,
    seed: int = 0,
) -> ForecastRun:
    """
    Conditional forecasts over the posterior and their output tables.

    Writes ``quantiles.csv``; ``draws.npz`` when ``save_draws`` is set and
    ``difference.csv`` (conditional minus unconditional mean paths) when
    ``difference`` is set. Both runs share the same seed.

    Raises:
        ValidationError: posterior and data disagree, or the scenario does not fit the horizon
        DrawFailure: forecasting failed for one parameter draw
    """
    settings.validate()
    if posterior.n != data.n:
        raise ValidationError(f"posterior has n={posterior.n}, data has {data.n} series")
    start = data.dates[-1] + 1
    h = scenario.horizon_for(start, default=settings.horizon)
    constraints = scenario.to_constraints(data.variables, start, h)
    history = data.history(posterior.p)
    dates = data.forecast_dates(h)
    root = forecast_seed(seed)

    def over_draws(cs: ConstraintSet) -> ForecastDraws:
        draws = forecast_over_draws(
            posterior,
            cs,
            h,
            history,
            n_forecast_per_param=settings.forecasts_per_draw,
            seed=root,
            threads=settings.threads,
        )
        return draws.with_variables(data.variables)

    run = ForecastRun(constraints)
    run.draws = over_draws(constraints)
    run.files["quantiles"] = write_table(
        quantile_table(run.draws, dates, settings.quantiles), output_dir / QUANTILES_FILE
    )
    if settings.save_draws:
        run.files["draws"] = write_draws(run.draws, dates, output_dir / DRAWS_FILE)
    if settings.difference:
        if constraints.is_empty():
            logger.warning("Difference table requested for an unconditional run")
        run.unconditional = over_draws(ConstraintSet())
        run.files["difference"] = write_table(
            difference_table(run.draws, run.unconditional, dates, settings.quantiles),
            output_dir / DIFFERENCE_FILE,
        )
    violations = run.draws.count_violations(constraints)
    if violations:
        logger.warning("%d forecast draws violate the constraints", violations)
    logger.info(
        "Forecast %s..%s: %d draws, kind=%s", dates[0], dates[-1], run.draws.n_draws, constraints.kind()
    )
    return run


def run_irf(
    data: Dataset,
    posterior: PosteriorDraws,
    settings: ForecastSettings,
    output_dir: Path,
) -> ForecastRun:
    """
    Mean-path responses to raising the one-step-ahead forecast of
    ``settings.irf_variable`` by ``settings.irf_size``, summarised over
    parameter draws in ``irf.csv``.
    """
    settings.validate()
    variable = data.index_of(settings.irf_variable)
    h = settings.irf_horizon
    history = data.history(posterior.p)
    responses = np.stack(
        [impulse_response(draw, history, h, variable, settings.irf_size) for draw in posterior]
    )
    run = ForecastRun(ConstraintSet(), responses=responses)
    run.files["irf"] = write_table(
        irf_table(responses, data.variables, data.forecast_dates(h), settings.quantiles),
        output_dir / IRF_FILE,
    )
    logger.info(
        "Responses to %+.3g in %s over %d quarters from %d draws",
        settings.irf_size,
        settings.irf_variable,
        h,
        len(posterior),
    )
    return run
