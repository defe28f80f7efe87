"""
Run Configuration
Tunable constants of the randomized and budgeted algorithms, read from a
flat KEY=value file with python-dotenv. CWGEOM_<KEY> environment variables
override file values.
"""

import os
from dataclasses import asdict, dataclass, fields, replace as dc_replace
from typing import Any, Dict, Mapping, Optional

from dotenv import dotenv_values

from tools.workspace_harness import ConfigError

ENV_PREFIX = "CWGEOM_"

# Conservative starting values; `cwgeom.py calibrate` prints measured ones.
DEFAULT_CONFIG: Dict[str, Any] = {
    "C_M": 12,
    "C_T": 32,
    "ALPHA": 4,
    "ROUND_CAP": 8,
    "MAX_RESTARTS": 16,
    "BUDGET_C_TRIANGULATION": 96,
    "BUDGET_C_VORONOI": 4096,
    "CONFLICT_C": 16,
    "SAMPLE_C": 64,
}

_INTEGER_KEYS = {"ROUND_CAP", "MAX_RESTARTS", "BUDGET_C_TRIANGULATION", "BUDGET_C_VORONOI"}


@dataclass(frozen=True)
class RunConfig:
    """
    Constants of one run

    Attributes:
        c_m: Conflict-mass threshold factor, M = c_m * n
        c_t: Excess threshold factor, T = c_t * s
        alpha: Per-vertex sample multiplier
        round_cap: Maximum amplification rounds of the good-vertex phase
        max_restarts: Restarts allowed before RetryLimitExceeded
        budget_c_triangulation: Word budget is this times s
        budget_c_voronoi: Word budget is this times (s + n/s)
        conflict_c: |B_triangle| bound factor, also the fallback threshold for b_v
        sample_c: Cap on per-round amplified samples, in multiples of s
    """

    c_m: float = DEFAULT_CONFIG["C_M"]
    c_t: float = DEFAULT_CONFIG["C_T"]
    alpha: float = DEFAULT_CONFIG["ALPHA"]
    round_cap: int = DEFAULT_CONFIG["ROUND_CAP"]
    max_restarts: int = DEFAULT_CONFIG["MAX_RESTARTS"]
    budget_c_triangulation: int = DEFAULT_CONFIG["BUDGET_C_TRIANGULATION"]
    budget_c_voronoi: int = DEFAULT_CONFIG["BUDGET_C_VORONOI"]
    conflict_c: float = DEFAULT_CONFIG["CONFLICT_C"]
    sample_c: float = DEFAULT_CONFIG["SAMPLE_C"]

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value <= 0:
                raise ConfigError(f"{f.name.upper()} must be positive, got {value}")
        for name in ("c_m", "c_t", "alpha"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name.upper()} must be at least 1")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]]) -> "RunConfig":
        """Build from KEY -> text pairs; unknown keys are rejected."""
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().upper()
            if key not in DEFAULT_CONFIG:
                raise ConfigError(f"unknown config key: {key}")
            kwargs[key.lower()] = _parse_value(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        values = dotenv_values(path)
        overrides = _env_overrides()
        values.update(overrides)
        return cls.from_mapping(values)

    @classmethod
    def from_env(cls) -> "RunConfig":
        return cls.from_mapping(_env_overrides())

    def replace(self, **changes) -> "RunConfig":
        return dc_replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        return {k.upper(): v for k, v in asdict(self).items()}


def _env_overrides() -> Dict[str, str]:
    found = {}
    for key in DEFAULT_CONFIG:
        value = os.getenv(ENV_PREFIX + key)
        if value is not None:
            found[key] = value
    return found


def _parse_value(key: str, raw: Optional[str]):
    if raw is None or not raw.strip():
        raise ConfigError(f"{key} has no value")
    text = raw.strip()
    try:
        if key in _INTEGER_KEYS:
            return int(text)
        value = float(text)
        return int(value) if value.is_integer() else value
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {text!r}")
