"""GA configuration and its key-value file format.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment. Keys::

    population_size  even integer >= 2            (default 100)
    generations      integer >= 0                 (default 1000)
    crossover_op     PMX | OX | CX | CX2          (default CX)
    crossover_rate   float in [0, 1]              (default 0.8)
    mutation_op      EM | IM | INM                (default EM)
    mutation_rate    float in [0, 1]              (default 0.05)
    elite_count      integer >= 0                 (default 2)
    lambda           route-count penalty > 0      (default 100)
    gamma            shift-overrun penalty > 0    (default 1000)
    rng_seed         integer                      (default 0)
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .operators import CROSSOVERS, MUTATIONS

# route-count penalties used for the larger published instances
INSTANCE_LAMBDA = {
    "i.40.1": 500.0,
    "i.80.1": 1000.0,
    "i.120.1": 5000.0,
    "i.163.1": 10000.0,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    generations: int = 1000
    crossover_op: str = "CX"
    crossover_rate: float = 0.8
    mutation_op: str = "EM"
    mutation_rate: float = 0.05
    elite_count: int = 2
    lam: float = 100.0
    gamma: float = 1000.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2:
            raise ConfigError("population_size must be an even number >= 2")
        if self.generations < 0:
            raise ConfigError("generations must be >= 0")
        if self.crossover_op not in CROSSOVERS:
            raise ConfigError(f"unknown crossover_op {self.crossover_op!r}")
        if self.mutation_op not in MUTATIONS:
            raise ConfigError(f"unknown mutation_op {self.mutation_op!r}")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elite_count <= self.population_size:
            raise ConfigError("elite_count must lie in [0, population_size]")
        if self.lam <= 0 or self.gamma <= 0:
            raise ConfigError("lambda and gamma must be positive")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, values):
        kwargs = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for key, raw in values.items():
            name = "lam" if key == "lambda" else key
            if name not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kind = types[name]
            try:
                if kind == "int":
                    value = int(raw)
                elif kind == "float":
                    value = float(raw)
                else:
                    value = str(raw).strip().upper()
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
            kwargs[name] = value
        return cls(**kwargs)


def read_config_values(text):
    """Raw ``{key: value}`` strings of a config file (not validated)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def parse_config(text):
    return GaConfig.from_dict(read_config_values(text))


def load_config(path):
    return parse_config(Path(path).read_text())


def dump_config(config):
    return "".join(f"{k} = {v}\n" for k, v in config.to_dict().items())
