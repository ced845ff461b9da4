from src.cond.constraints import (
    ConstraintSet,
    EqualityRows,
    GaussianRows,
    InequalityRows,
    ShockRows,
)
from src.cond.draws import ForecastDraws
from src.cond.moments import (
    ConditionalMoments,
    conditional_moments_linear,
    variance_preserving_omega,
)
from src.cond.pipeline import forecast_one, forecast_over_draws, impulse_response, sample_system
from src.cond.precision import PrecisionGaussian
from src.cond.samplers import (
    assemble_linear_restrictions,
    build_structural_scenario,
    draw_conditional_combined,
    draw_conditional_equality,
    draw_conditional_inequality,
    draw_conditional_linear,
    draw_conditional_linear_truncated,
    draw_conditional_mixed,
    draw_unconditional,
    shocks_to_observable_restrictions,
    structural_shocks,
)

__all__ = [
    "ConditionalMoments",
    "ConstraintSet",
    "EqualityRows",
    "ForecastDraws",
    "GaussianRows",
    "InequalityRows",
    "PrecisionGaussian",
    "ShockRows",
    "assemble_linear_restrictions",
    "build_structural_scenario",
    "conditional_moments_linear",
    "draw_conditional_combined",
    "draw_conditional_equality",
    "draw_conditional_inequality",
    "draw_conditional_linear",
    "draw_conditional_linear_truncated",
    "draw_conditional_mixed",
    "draw_unconditional",
    "forecast_one",
    "forecast_over_draws",
    "impulse_response",
    "sample_system",
    "shocks_to_observable_restrictions",
    "structural_shocks",
    "variance_preserving_omega",
]
