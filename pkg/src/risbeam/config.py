"""
Experiment configuration: YAML in, frozen dataclasses out.

Parsing is strict. Every key must belong to a known section, values are
coerced to the type of the field default, and the resolved configuration
(every default included) can be written back out and reloaded unchanged.
"""

import dataclasses
import math
from dataclasses import dataclass, field, fields

import yaml

from .ddpg import AgentConfig
from .errors import ConfigError
from .scenario import DISTRIBUTIONS, GeometryConfig, NoiseModel

SCHEMES = ("zf", "ddpg", "both")


@dataclass(frozen=True)
class UsersConfig:
    distribution: str = "poisson"
    # fixed user count; null switches to a Poisson count with the density below
    count: int | None = 2
    density_per_km2: float = 150.0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}, "
                             f"got {self.distribution!r}")
        if self.count is not None and self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count}")
        if not self.density_per_km2 > 0:
            raise ValueError("density_per_km2 must be positive")


@dataclass(frozen=True)
class SweepConfig:
    counts: tuple = (1, 2, 3, 4, 5, 6)
    distributions: tuple = DISTRIBUTIONS
    seeds: tuple = (42,)

    def __post_init__(self):
        for name in ("counts", "distributions", "seeds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.counts or min(self.counts) < 1:
            raise ValueError("sweep counts must all be at least 1")
        for d in self.distributions:
            if d not in DISTRIBUTIONS:
                raise ValueError(f"unknown distribution {d!r} in sweep")
        if not self.seeds:
            raise ValueError("sweep needs at least one seed")


@dataclass(frozen=True)
class CompareConfig:
    ris_sides: tuple = (4, 6)
    alphas: tuple = (1.0, 2.0)

    def __post_init__(self):
        object.__setattr__(self, "ris_sides", tuple(int(s) for s in self.ris_sides))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.ris_sides or min(self.ris_sides) < 1:
            raise ValueError("ris_sides must be positive")
        if not self.alphas or min(self.alphas) <= 0:
            raise ValueError("alphas must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: GeometryConfig = field(default_factory=GeometryConfig)
    noise: NoiseModel = field(default_factory=NoiseModel)
    users: UsersConfig = field(default_factory=UsersConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    scheme: str = "both"
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    output_dir: str = "results"
    seed: int = 42
    svg: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        # the top-level seed drives every stream, the agent included
        if self.agent.seed != self.seed:
            object.__setattr__(self, "agent", dataclasses.replace(self.agent, seed=self.seed))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


SECTIONS = {
    "scenario": GeometryConfig,
    "noise": NoiseModel,
    "users": UsersConfig,
    "agent": AgentConfig,
    "sweep": SweepConfig,
    "compare": CompareConfig,
}


def _coerce(path, value, default):
    """Convert ``value`` to the type suggested by the field default."""
    if value is None or default is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        # YAML 1.1 reads "1e-5" as a string
        try:
            out = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: expected a number, got {value!r}") from None
        if isinstance(value, bool) or not math.isfinite(out):
            raise ConfigError(f"{path}: expected a finite number, got {value!r}")
        return out
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return tuple(value)
    return value


def _build(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key {path}.{key}" if path else f"unknown key {key}")
    defaults = cls()
    kwargs = {}
    for key, value in data.items():
        kwargs[key] = _coerce(f"{path}.{key}", value, getattr(defaults, key))
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def from_dict(data):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    top = {}
    for key, value in data.items():
        if key in SECTIONS:
            top[key] = _build(SECTIONS[key], value, key)
        elif key in ("scheme", "output_dir", "seed", "svg"):
            top[key] = _coerce(key, value, getattr(ExperimentConfig, key))
        else:
            raise ConfigError(f"unknown key {key}")
    try:
        return ExperimentConfig(**top)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def to_dict(cfg):
    out = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            out[f.name] = {g.name: _plain(getattr(value, g.name)) for g in fields(value)}
        else:
            out[f.name] = _plain(value)
    return out


def dumps(cfg):
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None)


def loads(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration is not valid YAML: {exc}") from exc
    return from_dict(data)


def load(path):
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc


def save(cfg, path):
    with open(path, "w") as fh:
        fh.write(dumps(cfg))
