from src.est.acp import (
    AcpEquationPosterior,
    AcpEvaluator,
    AcpPosterior,
    AcpPrior,
    acp_draw_params,
    acp_equation_log_ml,
    acp_equation_posterior,
    acp_log_marginal_likelihood,
    acp_posterior,
    ar_residual_variances,
    equation_regressors,
    minnesota_variance,
)
from src.est.niw import NiwPrior, build_regressors, gibbs_niw, ols_start
from src.est.posterior import PosteriorDraws
from src.est.shrinkage import REFERENCE_SHRINKAGE, ShrinkageResult, optimize_shrinkage

__all__ = [
    "REFERENCE_SHRINKAGE",
    "AcpEquationPosterior",
    "AcpEvaluator",
    "AcpPosterior",
    "AcpPrior",
    "NiwPrior",
    "PosteriorDraws",
    "ShrinkageResult",
    "acp_draw_params",
    "acp_equation_log_ml",
    "acp_equation_posterior",
    "acp_log_marginal_likelihood",
    "acp_posterior",
    "ar_residual_variances",
    "build_regressors",
    "equation_regressors",
    "gibbs_niw",
    "minnesota_variance",
    "ols_start",
    "optimize_shrinkage",
]
