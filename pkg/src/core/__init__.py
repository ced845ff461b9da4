from src.core.context import RunContext, get_context, init_context, reset_context
from src.core.errors import CondcastError, DrawFailure, NumericalError, ValidationError

__all__ = [
    "CondcastError",
    "DrawFailure",
    "NumericalError",
    "RunContext",
    "ValidationError",
    "get_context",
    "init_context",
    "reset_context",
]
