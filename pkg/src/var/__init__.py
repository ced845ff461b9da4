from src.var.params import (
    ReducedParams,
    SvarParams,
    companion_matrix,
    is_stable,
    reduced_to_structural,
)
from src.var.system import (
    ForecastSystem,
    build_forecast_system,
    simulate_recursive,
    unconditional_moments,
)

__all__ = [
    "ForecastSystem",
    "ReducedParams",
    "SvarParams",
    "build_forecast_system",
    "companion_matrix",
    "is_stable",
    "reduced_to_structural",
    "simulate_recursive",
    "unconditional_moments",
]
