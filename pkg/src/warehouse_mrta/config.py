"""Experiment and training configuration, read from flat ``key = value`` files."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .env import RewardScheme, WarehouseEnv
from .errors import InvalidConfig
from .layout import resolve_layout
from .navigation import make_provider
from .tasking import GenerationMode, TaskGenerator


@dataclass
class ExperimentConfig:
    layout: str = "empty:10x10"
    robots: int = 10
    capacity: int = 10
    navigation: str = "direct"
    reward: str = "ttd"
    tasks: str = "random"
    seed: int = 0
    n_tasks: int = 500
    seeds: int = 5
    noise: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.robots < 1:
            raise InvalidConfig("robots must be >= 1")
        if self.capacity < 1:
            raise InvalidConfig("capacity must be >= 1")
        if self.n_tasks < 1:
            raise InvalidConfig("n_tasks must be >= 1")
        if self.seeds < 1:
            raise InvalidConfig("seeds must be >= 1")
        try:
            mode = GenerationMode(self.tasks)
            RewardScheme(self.reward)
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from exc
        if mode is GenerationMode.TWO_TASK and self.capacity != 2:
            raise InvalidConfig("two_task generation needs capacity = 2")
        if mode is GenerationMode.SEQUENCE:
            raise InvalidConfig("sequence generation is only available through scenario fixtures")
        if self.navigation not in ("direct", "astar"):
            raise InvalidConfig(f"unknown navigation {self.navigation!r}")

    def make_env(self, seed: int | None = None) -> WarehouseEnv:
        """Fresh environment, reset and ready at its first decision point."""
        seed = self.seed if seed is None else seed
        layout = resolve_layout(self.layout)
        provider = make_provider(self.navigation, layout)
        gen = TaskGenerator(self.tasks, layout, provider, seed=[seed, 1])
        env = WarehouseEnv(
            layout,
            self.robots,
            gen,
            provider=provider,
            scheme=self.reward,
            noise=self.noise,
            capacity=self.capacity,
            seed=[seed, 2],
        )
        env.reset()
        return env


@dataclass
class TrainConfig:
    learning_rate: float = 3e-4
    rollout_length: int = 512
    epochs_per_update: int = 16
    minibatch_size: int = 32
    gamma: float = 0.99
    lam: float = 0.95
    clip_epsilon: float = 0.2
    entropy_coef_start: float = 0.01
    entropy_coef_end: float = 0.001
    value_coef: float = 0.0002
    policy_coef: float = 0.02
    n_envs: int = 4
    total_iterations: int = 100

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise InvalidConfig("gamma must lie in (0, 1)")
        if not 0 <= self.lam <= 1:
            raise InvalidConfig("lam must lie in [0, 1]")
        for name in ("entropy_coef_start", "entropy_coef_end", "value_coef", "policy_coef", "learning_rate"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0")
        if min(self.rollout_length, self.epochs_per_update, self.minibatch_size, self.n_envs) < 1:
            raise InvalidConfig("rollout_length, epochs, minibatch_size and n_envs must be >= 1")
        if self.total_iterations < 0:
            raise InvalidConfig("total_iterations must be >= 0")

    def entropy_coef(self, iteration: int) -> float:
        """Linear anneal from start to end across ``total_iterations`` updates."""
        if self.total_iterations <= 1:
            return self.entropy_coef_start
        frac = min(max(iteration / (self.total_iterations - 1), 0.0), 1.0)
        return self.entropy_coef_start + frac * (self.entropy_coef_end - self.entropy_coef_start)


def _coerce(value: str, typ):
    typ = typ if isinstance(typ, type) else {"int": int, "float": float, "bool": bool, "str": str}[typ]
    if typ is bool:
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise InvalidConfig(f"not a boolean: {value!r}")
    try:
        return typ(value)
    except ValueError as exc:
        raise InvalidConfig(f"cannot read {value!r} as {typ.__name__}") from exc


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def build_configs(values: dict[str, str]) -> tuple[ExperimentConfig, TrainConfig]:
    exp_fields = {f.name: f.type for f in fields(ExperimentConfig)}
    train_fields = {f.name: f.type for f in fields(TrainConfig)}
    exp_kw, train_kw = {}, {}
    for key, value in values.items():
        if key in exp_fields:
            exp_kw[key] = _coerce(value, exp_fields[key])
        elif key in train_fields:
            train_kw[key] = _coerce(value, train_fields[key])
        else:
            raise InvalidConfig(f"unknown config key {key!r}")
    return ExperimentConfig(**exp_kw), TrainConfig(**train_kw)


def load_config(path, overrides: dict[str, str] | None = None) -> tuple[ExperimentConfig, TrainConfig]:
    try:
        values = parse_config_text(Path(path).read_text()) if path else {}
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    values.update(overrides or {})
    return build_configs(values)


def config_to_dict(*configs) -> dict:
    out = {}
    for cfg in configs:
        out.update(dataclasses.asdict(cfg))
    return out
