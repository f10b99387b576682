"""Pipeline configuration: file, environment and flag resolution.

Config files are flat JSON objects. Resolution order is defaults, then the
file named by --config (or the SLALOM_CONFIG environment variable), then
explicit command-line flags; later layers win key by key. The hash of the
fully resolved config is stamped into every report so outputs are
traceable to the exact settings that produced them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import ConfigError
from .metrics import DEFAULT_METRICS, FILL_POLICIES
from .gates import WINDOW_STATS

ENV_CONFIG = "SLALOM_CONFIG"

GATE_SOURCES = ("tuckman-default", "band", "none")  # or a path to a gate file


@dataclass(frozen=True)
class PipelineConfig:
    bins: int = 100
    trim_fraction: float = 0.05
    trim_policy: str = "after-first"
    band_multiplier: float = 2.0
    sigma_floor: float = 0.01
    metrics: tuple[str, ...] = DEFAULT_METRICS
    fill: str = "interpolate"
    gate_source: str = "tuckman-default"
    gate_value_half_width: float = 0.1
    gate_window_half_width: float = 5.0
    window_stat: str = "mean"
    weights: dict[str, float] | None = None
    delta: str = "abs"
    embedding_provider: str = "hashed"
    embedding_dim: int = 256
    embedding_seed: int = 0
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        if not 0.0 <= self.trim_fraction < 0.5:
            raise ConfigError(f"trim_fraction must lie in [0, 0.5), got {self.trim_fraction}")
        if self.fill not in FILL_POLICIES:
            raise ConfigError(f"fill must be one of {FILL_POLICIES}, got {self.fill!r}")
        if self.window_stat not in WINDOW_STATS:
            raise ConfigError(f"window_stat must be one of {WINDOW_STATS}")
        if self.delta not in ("abs", "squared"):
            raise ConfigError(f"delta must be 'abs' or 'squared', got {self.delta!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.embedding_provider != "hashed":
            raise ConfigError(f"unknown embedding provider {self.embedding_provider!r}")
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if self.weights is not None:
            object.__setattr__(
                self, "weights", {str(k): float(v) for k, v in self.weights.items()})

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["metrics"] = list(self.metrics)
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


_FIELD_NAMES = {f.name for f in dataclasses.fields(PipelineConfig)}


def config_from_dict(data: Mapping[str, Any]) -> PipelineConfig:
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kwargs: dict[str, Any] = dict(data)
    if "metrics" in kwargs and isinstance(kwargs["metrics"], str):
        kwargs["metrics"] = tuple(m.strip() for m in kwargs["metrics"].split(",") if m.strip())
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | None = None,
                env: Mapping[str, str] | None = None,
                overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Resolve defaults <- config file <- explicit overrides."""
    env = os.environ if env is None else env
    if path is None:
        path = env.get(ENV_CONFIG) or None
    merged: dict[str, Any] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        merged.update(data)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(merged)
