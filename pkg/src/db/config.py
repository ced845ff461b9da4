from __future__ import annotations

import json
import logging
from abc import ABC
from dataclasses import MISSING, dataclass, field, fields
from pathlib import Path
from typing import (
    Any,
    TypeVar,
    Union,
    get_args,
    get_origin,
    get_type_hints,
)

from src.core.errors import InvalidPrior, ValidationError

logger = logging.getLogger("condcast.db.config")

T = TypeVar("T", bound="ConfigBase")


def _is_optional(field_type: Any) -> bool:
    """Check if type is Optional[X]"""
    origin = get_origin(field_type)
    if origin is type(None):
        return True
    if origin is Union:
        return type(None) in get_args(field_type)
    return False


def _get_inner_type(field_type: Any) -> Any:
    """Get inner type from Optional[X] or list[X]"""
    origin = get_origin(field_type)
    if origin is list:
        args = get_args(field_type)
        return args[0] if args else Any
    if origin is Union:
        for arg in get_args(field_type):
            if arg is not type(None):
                return arg
    return field_type


@dataclass
class ConfigBase(ABC):
    """
    Base class for all settings sections.
    Automatic serialization/deserialization to JSON.
    """

    def to_dict(self, exclude_defaults: bool = False, exclude_none: bool = True) -> dict[str, Any]:
        """
        Convert to dictionary.

        Args:
            exclude_defaults: Exclude fields with default values
            exclude_none: Exclude fields with None value
        """
        result = {}

        for f in fields(self):
            value = getattr(self, f.name)

            if exclude_none and value is None:
                continue

            if exclude_defaults:
                if f.default is not MISSING and value == f.default:
                    continue
                if f.default_factory is not MISSING and value == f.default_factory():
                    continue

            if isinstance(value, ConfigBase):
                result[f.name] = value.to_dict(exclude_defaults, exclude_none)
            elif isinstance(value, list):
                result[f.name] = [
                    item.to_dict(exclude_defaults, exclude_none)
                    if isinstance(item, ConfigBase)
                    else item
                    for item in value
                ]
            else:
                result[f.name] = value

        return result

    def to_json(self, indent: int | None = 2, ensure_ascii: bool = False) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=ensure_ascii)

    @classmethod
    def from_dict(cls: type[T], data: dict[str, Any] | None) -> T:
        """
        Create instance from dictionary.

        Raises:
            ValidationError: unknown keys or a non-mapping section
        """
        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise ValidationError(f"{cls.__name__}: expected a mapping, got {type(data).__name__}")

        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"{cls.__name__}: unknown settings {unknown}")

        field_types = get_type_hints(cls)
        kwargs = {}
        for f in fields(cls):
            if f.name not in data:
                continue

            value = data[f.name]
            field_type = field_types.get(f.name, f.type)

            if _is_optional(field_type):
                if value is None:
                    kwargs[f.name] = None
                    continue
                field_type = _get_inner_type(field_type)

            origin = get_origin(field_type)

            if origin is list:
                inner_type = _get_inner_type(field_type)
                if isinstance(inner_type, type) and issubclass(inner_type, ConfigBase):
                    kwargs[f.name] = [inner_type.from_dict(item) for item in value]
                else:
                    kwargs[f.name] = list(value)
            elif isinstance(field_type, type) and issubclass(field_type, ConfigBase):
                kwargs[f.name] = field_type.from_dict(value)
            else:
                kwargs[f.name] = value

        return cls(**kwargs)

    @classmethod
    def from_json(cls: type[T], json_str: str) -> T:
        try:
            data = json.loads(json_str)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{cls.__name__}: malformed JSON: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def load(cls: type[T], filepath: Path | str) -> T:
        """Load from JSON file; a missing file gives the defaults."""
        path = Path(filepath)
        if not path.exists():
            logger.debug("Settings file %s not found, using defaults", path)
            return cls()
        return cls.from_json(path.read_text(encoding="utf-8"))

    def save(self, filepath: Path | str, indent: int = 2) -> bool:
        """Save to JSON file."""
        path = Path(filepath)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_json(indent=indent) + "\n", encoding="utf-8")
            return True
        except OSError as e:
            logger.error("Error saving settings to %s: %s", filepath, e)
            return False

    def update(self, **kwargs) -> None:
        """Update fields from kwargs; ``None`` values are skipped."""
        for key, value in kwargs.items():
            if value is None:
                continue
            if not hasattr(self, key):
                raise ValidationError(f"{type(self).__name__} has no setting {key!r}")
            setattr(self, key, value)

    def copy(self: T) -> T:
        return self.__class__.from_dict(self.to_dict())


class PriorChoice:
    """Estimation backends."""

    NIW = "niw"
    ACP = "acp"

    ALL = [NIW, ACP]

    LABELS = {
        NIW: "Независимый нормальный / обратный Уишарт (Гиббс)",
        ACP: "Асимметричный сопряжённый приор (Миннесота)",
    }


class Transformation:
    """Series transformations."""

    LEVEL = "level"
    LOG100 = "log100"
    # Annualised quarterly growth rate in percent
    GROWTH400 = "growth400"

    ALL = [LEVEL, LOG100, GROWTH400]

    LABELS = {
        LEVEL: "Уровень",
        LOG100: "100·ln(x)",
        GROWTH400: "400·Δln(x)",
    }


DEFAULT_QUANTILES = [5, 16, 50, 84, 95]


@dataclass
class EstimationSettings(ConfigBase):
    """Estimation settings."""

    prior: str = PriorChoice.ACP
    lags: int = 4
    draws: int = 25_000
    burn_in: int = 10_000
    thin: int = 1
    seed: int = 0
    # Minnesota shrinkage; None means optimise the marginal likelihood
    kappa1: float | None = None
    kappa2: float | None = None
    optimize_kappa: bool = True
    symmetric_kappa: bool = False
    kappa_grid_size: int = 15
    own_lag_mean: float = 1.0

    def validate(self) -> None:
        if self.prior not in PriorChoice.ALL:
            raise InvalidPrior(f"prior must be one of {PriorChoice.ALL}, got {self.prior!r}")
        if self.lags < 1:
            raise ValidationError(f"lags must be at least 1, got {self.lags}")
        if self.draws < 1 or self.burn_in < 0 or self.thin < 1:
            raise ValidationError("draws >= 1, burn_in >= 0 and thin >= 1 are required")
        for name in ("kappa1", "kappa2"):
            value = getattr(self, name)
            if value is not None and value <= 0.0:
                raise InvalidPrior(f"{name} must be positive, got {value}")
        if self.kappa_grid_size < 2:
            raise ValidationError("kappa_grid_size must be at least 2")

    def fixed_kappa(self) -> tuple[float, float] | None:
        """``(kappa1, kappa2)`` when shrinkage is fixed rather than optimised."""
        if self.kappa1 is None:
            return None
        return self.kappa1, self.kappa1 if self.kappa2 is None else self.kappa2


@dataclass
class ForecastSettings(ConfigBase):
    """Forecast settings."""

    horizon: int = 13
    forecasts_per_draw: int = 1
    quantiles: list[float] = field(default_factory=lambda: DEFAULT_QUANTILES.copy())
    save_draws: bool = False
    difference: bool = False
    threads: int = 1
    irf_variable: str = "GDPC1"
    irf_size: float = 1.0
    irf_horizon: int = 12

    def validate(self) -> None:
        if self.horizon < 1 or self.forecasts_per_draw < 1 or self.threads < 1:
            raise ValidationError("horizon, forecasts_per_draw and threads must be positive")
        if not self.quantiles or any(not 0.0 < q < 100.0 for q in self.quantiles):
            raise ValidationError(f"quantiles must lie in (0, 100), got {self.quantiles}")
        if sorted(self.quantiles) != list(self.quantiles):
            raise ValidationError("quantiles must be listed in ascending order")
        if self.irf_horizon < 1:
            raise ValidationError("irf_horizon must be positive")


@dataclass
class BenchConfig(ConfigBase):
    """One benchmark cell."""

    n: int = 8
    p: int = 2
    h: int = 5
    n_o: int = 3


@dataclass
class BenchSettings(ConfigBase):
    """Benchmark harness settings."""

    draws: int = 1000
    repeats: int = 5
    T: int = 300
    seed: int = 0
    include_naive: bool = False
    # "truth" reuses the DGP parameters, "posterior" runs a short NIW chain
    param_source: str = "truth"
    posterior_burn_in: int = 200
    configs: list[BenchConfig] = field(default_factory=list)

    def validate(self) -> None:
        if self.draws < 1 or self.repeats < 1:
            raise ValidationError("draws and repeats must be positive")
        if self.param_source not in ("truth", "posterior"):
            raise ValidationError(f"param_source must be truth or posterior, got {self.param_source!r}")
        for cfg in self.configs:
            if min(cfg.n, cfg.p, cfg.h, cfg.n_o) < 1 or cfg.n_o > cfg.n:
                raise ValidationError(f"invalid benchmark cell {cfg.to_dict()}")


@dataclass
class SeriesEntry(ConfigBase):
    """One data series."""

    name: str = ""
    mnemonic: str = ""
    transformation: str = Transformation.LOG100


@dataclass
class DataSettings(ConfigBase):
    """Input data settings."""

    path: str | None = None
    start: str | None = None
    end: str | None = None
    # Empty means the full FRED-QD list
    series: list[SeriesEntry] = field(default_factory=list)

    def validate(self) -> None:
        for entry in self.series:
            if not entry.mnemonic:
                raise ValidationError("series mnemonic must not be empty")
            if entry.transformation not in Transformation.ALL:
                raise ValidationError(
                    f"series {entry.mnemonic}: transformation must be one of {Transformation.ALL}"
                )
