from __future__ import annotations

from typing import Any


class CondcastError(Exception):
    """Base error of the package."""

    category: str = "error"

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details

    def to_record(self) -> dict[str, Any]:
        """Machine-parseable error record."""
        record: dict[str, Any] = {
            "error": self.__class__.__name__,
            "category": self.category,
            "message": self.message,
        }
        record.update(self.details)
        return record


class ValidationError(CondcastError, ValueError):
    """Invalid input: dimensions, files, scenario content."""

    category = "validation"


class NumericalError(CondcastError, ArithmeticError):
    """Numerical failure inside a factorization or sampler."""

    category = "numerical"


# Validation
class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class InconsistentSystem(ValidationError):
    pass


class OverlappingConstraints(ValidationError):
    pass


class InvalidBounds(ValidationError):
    pass


class InvalidPrior(ValidationError):
    pass


class DimensionGuard(ValidationError):
    pass


class EmptyConstraint(ValidationError):
    pass


class MissingColumn(ValidationError):
    pass


class MissingValue(ValidationError):
    def __init__(self, message: str = "", row: str = "", column: str = ""):
        super().__init__(message, row=row, column=column)
        self.row = row
        self.column = column


class NonPositiveForLog(ValidationError):
    pass


class UnknownVariable(ValidationError):
    pass


class DateOutsideHorizon(ValidationError):
    pass


class OverlapEqualityInequality(ValidationError):
    pass


class ScenarioFormatError(ValidationError):
    pass


# Numerical
class NotPositiveDefinite(NumericalError):
    pass


class SingularDiagonal(NumericalError):
    pass


class SingularA0(NumericalError):
    pass


class RankDeficientR(NumericalError):
    pass


class RankDeficientW(NumericalError):
    pass


class RankDeficientStack(NumericalError):
    pass


class IndefiniteShockCov(NumericalError):
    pass


class TiltingDiverged(NumericalError):
    pass


class RegionTooImprobable(NumericalError):
    pass


class BudgetExhausted(NumericalError):
    pass


class ExplosiveDraw(NumericalError):
    pass


class DrawFailure(CondcastError):
    """Failure while forecasting from one parameter draw."""

    def __init__(self, draw_index: int, cause: BaseException):
        super().__init__(f"parameter draw {draw_index}: {cause}", draw_index=draw_index)
        self.draw_index = draw_index
        self.cause = cause
        if isinstance(cause, CondcastError):
            self.category = cause.category
        else:
            self.category = "numerical"

    def to_record(self) -> dict[str, Any]:
        record = super().to_record()
        record["cause"] = type(self.cause).__name__
        return record


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, CondcastError):
        return EXIT_VALIDATION if exc.category == "validation" else EXIT_NUMERICAL
    if isinstance(exc, (ValueError, FileNotFoundError, KeyError)):
        return EXIT_VALIDATION
    return EXIT_NUMERICAL
