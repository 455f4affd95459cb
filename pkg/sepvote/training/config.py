"""Training configuration."""

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from sepvote.autodiff.tensor import DTYPES
from sepvote.errors import ConfigError


@dataclass(frozen=True, kw_only=True)
class TrainConfig:
    """
    Optimiser and loop settings.

    Attributes:
        lr: Initial Adam learning rate.
        beta1: First-moment decay.
        beta2: Second-moment decay.
        epsilon: Denominator guard.
        decay: Inverse-time decay; step t uses lr / (1 + decay * t).
        epochs: Passes over the training split.
        batch_size: Samples per Adam step; the last batch of an epoch may be smaller.
        seed: Seed for initialisation and shuffling.
        dtype: Parameter precision, "f32" or "f64".
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    decay: float = 1e-6
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    dtype: str = "f32"

    def __post_init__(self) -> None:
        if not self.lr >= 0:
            raise ConfigError(f"lr must be non-negative, got {self.lr}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise ConfigError(f"{name} must be in [0, 1), got {value}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.decay < 0:
            raise ConfigError(f"decay must be non-negative, got {self.decay}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.dtype not in DTYPES:
            raise ConfigError(f"dtype must be one of {sorted(DTYPES)}, got {self.dtype!r}")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        """
        Build a config from a mapping with exactly the config field names.

        Raises:
            ConfigError: Unknown keys or invalid values.
        """
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"Unknown config keys: {unknown}. Valid keys: {cls.field_names()}")
        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigError(f"Invalid config: {err}") from err

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        """
        Read a JSON or TOML (by `.toml` extension) config file.

        Raises:
            ConfigError: The file cannot be parsed or holds invalid settings.
        """
        path = Path(path)
        try:
            if path.suffix.lower() == ".toml":
                with open(path, "rb") as f:
                    data = tomllib.load(f)
            else:
                with open(path) as f:
                    data = json.load(f)
        except FileNotFoundError as err:
            raise ConfigError(f"Config file not found: {path}") from err
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
            raise ConfigError(f"Cannot parse config file {path}: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold an object")
        return cls.from_dict(data)

    def with_overrides(self, **overrides: Any) -> "TrainConfig":
        """Return a copy with every non-None override applied."""
        unknown = sorted(set(overrides) - set(self.field_names()))
        if unknown:
            raise ConfigError(f"Unknown config keys: {unknown}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
