"""Run configuration: strict JSON with full key coverage.

Unknown keys anywhere in the document are rejected so that typos cannot
silently fall back to defaults.  Every run writes its fully resolved config
next to its metrics stream.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .curriculum import MODES
from .policy import ConditioningConfig
from .scenarios import SCENARIO_NAMES
from .trainer import TrainerConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "nav_scenario1"
    conditioning: ConditioningConfig = field(default_factory=ConditioningConfig)
    curriculum: str = "normal"
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    total_steps: int = 3_000_000
    eval_interval: int = 25           # updates between curriculum evaluations
    eval_episodes_per_task: int = 20
    final_eval_episodes: int = 50
    seeds: tuple[int, ...] = (0, 1, 2)
    closure_cap: int = 20000
    layout_file: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"available: {list(SCENARIO_NAMES)}")
        if self.curriculum not in MODES:
            raise ConfigError(f"curriculum mode must be one of {MODES}")
        if self.eval_interval < 1:
            raise ConfigError("eval_interval must be >= 1")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["conditioning"] = {"mode": self.conditioning.mode,
                             "layers": list(self.conditioning.layers)}
        d["trainer"] = dataclasses.asdict(self.trainer)
        d["seeds"] = list(self.seeds)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _take(data: dict, context: str, allowed: set[str]) -> dict:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")
    return data


def config_from_dict(data: dict) -> RunConfig:
    top_fields = {f.name for f in dataclasses.fields(RunConfig)}
    _take(data, "config", top_fields)
    kwargs: dict = {}
    for key, value in data.items():
        if key == "conditioning":
            _take(value, "conditioning", {"mode", "layers"})
            kwargs[key] = ConditioningConfig(
                mode=value.get("mode", "film"),
                layers=tuple(value.get("layers", (3,))))
        elif key == "trainer":
            trainer_fields = {f.name for f in dataclasses.fields(TrainerConfig)}
            _take(value, "trainer", trainer_fields)
            kwargs[key] = TrainerConfig(**value)
        elif key == "seeds":
            kwargs[key] = tuple(int(s) for s in value)
        else:
            kwargs[key] = value
    return RunConfig(**kwargs)


def load_config(path: str) -> RunConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
