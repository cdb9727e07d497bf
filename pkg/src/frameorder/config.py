"""Pipeline configuration: TOML file plus flag overrides.

Every CLI flag has a config-file twin of the same name (dashes become
underscores). Precedence: command-line flag > FRAME_SEED env var (seed only)
> config file > built-in default. Unknown config keys are rejected so typos
cannot silently change a run.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .corpus import TOKENIZERS
from .errors import ConfigError
from .manifest import SCHEDULES

ENV_SEED = "FRAME_SEED"


@dataclass
class PipelineConfig:
    corpus_path: Optional[str] = None
    corpus_format: str = "jsonl"
    output_dir: str = "frameorder_out"
    score_source: str = "builtin"  # "builtin" or "external"
    scores_path: Optional[str] = None
    weak_order: int = 1
    strong_order: int = 3
    smoothing_k: float = 0.1
    tokenizer: str = "whitespace"
    batch_size: int = 10
    steepness: float = 35.0
    schedule: str = "frame"
    seed: int = 0
    cutoff_fraction: float = 0.1
    bins: int = 20
    loss_curves: list = field(default_factory=list)
    threads: int = 1
    strict: bool = False
    figures: bool = True

    def validate(self) -> None:
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"unknown schedule {self.schedule!r}; choose one of {SCHEDULES}")
        if self.score_source not in ("builtin", "external"):
            raise ConfigError(f"score_source must be 'builtin' or 'external', got {self.score_source!r}")
        if self.score_source == "external" and not self.scores_path:
            raise ConfigError("score_source is 'external' but no scores_path given")
        if self.tokenizer not in TOKENIZERS:
            raise ConfigError(f"unknown tokenizer {self.tokenizer!r}; choose one of {tuple(TOKENIZERS)}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.steepness <= 0:
            raise ConfigError(f"steepness must be positive, got {self.steepness}")
        if not 0.0 < self.cutoff_fraction < 1.0:
            raise ConfigError(f"cutoff_fraction must be in (0, 1), got {self.cutoff_fraction}")
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        if self.weak_order < 1 or self.strong_order < 1:
            raise ConfigError("n-gram orders must be >= 1")
        if self.weak_order >= self.strong_order:
            raise ConfigError(
                f"weak order ({self.weak_order}) must be below strong order "
                f"({self.strong_order}) to keep a capacity gap"
            )
        if self.smoothing_k <= 0:
            raise ConfigError(f"smoothing_k must be positive, got {self.smoothing_k}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


_FIELD_NAMES = {f.name for f in dataclasses.fields(PipelineConfig)}


def load_config_file(path) -> dict:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
    return data


def build_config(config_path=None, overrides: Optional[dict] = None) -> PipelineConfig:
    """Assemble the effective config from file, environment, and flags."""
    values: dict = {}
    if config_path is not None:
        values.update(load_config_file(config_path))
    env_seed = os.environ.get(ENV_SEED)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {env_seed!r}")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    try:
        config = PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config
