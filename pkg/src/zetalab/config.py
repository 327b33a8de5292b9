"""Run configuration: the full reproducibility record of a run."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError

MODELS = ("disc", "euler", "rem")
WEIGHT_MODELS = ("uniform-circle", "gaussian")


def _beta_to_json(b: complex):
    b = complex(b)
    return [b.real, b.imag]


@dataclass(frozen=True, kw_only=True)
class RunConfig:
    seed: int
    model: str = "disc"
    betas: tuple = (1.0,)
    scales: tuple = (4, 5, 6, 7, 8, 9, 10, 11, 12)
    grid_sizes: tuple | None = None
    replicas: int = 50
    k0: int = 4
    tail_blocks: int = 3
    k_max: int = 4
    mode_tol: float = 1e-8
    weight_model: str = "uniform-circle"
    gammas: tuple = ()
    bootstrap: int = 200
    reduce_complex: bool = True
    workers: int = 1
    out_dir: str = "."

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(complex(b) for b in self.betas))
        object.__setattr__(self, "scales", tuple(int(s) for s in self.scales))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if self.grid_sizes is not None:
            object.__setattr__(self, "grid_sizes", tuple(int(g) for g in self.grid_sizes))
        self.validate()

    def validate(self):
        problems = []
        if not isinstance(self.seed, int) or self.seed < 0:
            problems.append("seed: must be a non-negative integer")
        if self.model not in MODELS:
            problems.append(f"model: must be one of {MODELS}, got {self.model!r}")
        if self.weight_model not in WEIGHT_MODELS:
            problems.append(f"weight_model: must be one of {WEIGHT_MODELS}")
        if self.replicas < 1:
            problems.append("replicas: must be >= 1")
        if list(self.scales) != sorted(set(self.scales)):
            problems.append("scales: must be strictly increasing")
        if self.grid_sizes is not None and len(self.grid_sizes) != len(self.scales):
            problems.append("grid_sizes: need one entry per scale")
        if not 0 <= self.k0 <= self.k_max:
            problems.append(f"k0: must lie in [0, k_max={self.k_max}]")
        if self.tail_blocks < 0:
            problems.append("tail_blocks: must be >= 0")
        if not self.mode_tol > 0:
            problems.append("mode_tol: must be positive")
        if self.workers < 1:
            problems.append("workers: must be >= 1")
        if self.bootstrap < 1:
            problems.append("bootstrap: must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["betas"] = [_beta_to_json(b) for b in self.betas]
        d["scales"] = list(self.scales)
        d["gammas"] = list(self.gammas)
        d["grid_sizes"] = None if self.grid_sizes is None else list(self.grid_sizes)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        if "betas" in d:
            d["betas"] = tuple(complex(*b) if isinstance(b, (list, tuple)) else complex(b) for b in d["betas"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()
