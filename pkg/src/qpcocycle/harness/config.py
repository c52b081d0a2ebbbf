"""Experiment configuration with strict JSON round-trip."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

SCHEMA_VERSION = 1

# spike at a_4: q = 1, 1, 2, 3, 602, ...; level 2 sees q_4 >= 200 q_3
DESK_QUOTIENTS = [1, 1, 1, 200, 1, 1, 1, 1]


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    text = resources.files("qpcocycle.harness").joinpath("schemas", name).read_text()
    return json.loads(text)


@dataclass
class ExperimentConfig:
    schema_version: int = SCHEMA_VERSION
    freq_rule: dict = field(default_factory=lambda: {"kind": "explicit",
                                                     "quotients": list(DESK_QUOTIENTS)})
    depth: int = 8
    cls: str = "Cl"
    class_params: dict = field(default_factory=lambda: {"l": 1})
    lam: float = 100.0
    lambda_sweep: list = field(default_factory=lambda: [50.0, 100.0])
    N: int = 2
    n_max: int = 2
    grid: list = field(default_factory=lambda: [500, 1000, 2000])
    horizon: int | None = None
    horizon_cap: int = 10_000_000
    tolerances: dict = field(default_factory=lambda: {"angle": 1e-6, "resonance": 1e-8,
                                                      "eps_hyp": 0.1})
    nodes: int = 81
    verify_samples: int = 100
    gap_threshold: float = 0.1
    trials: int = 10_000
    seed: int = 1
    orbit_samples: int = 200
    orbit_max_level: int = 12
    max_partition: int = 12

    _renames = {"cls": "class", "lam": "lambda"}

    def to_dict(self) -> dict:
        out = {}
        for k in self.__dataclass_fields__:
            out[self._renames.get(k, k)] = copy.deepcopy(getattr(self, k))
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, load_schema("config.schema.json"))
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config rejected: {exc.message}") from None
        back = {v: k for k, v in cls._renames.items()}
        cfg = cls(**{back.get(k, k): copy.deepcopy(v) for k, v in data.items()})
        if cfg.N > cfg.n_max:
            raise ConfigError("N must not exceed n_max")
        tol = {"angle": 1e-6, "resonance": 1e-8, "eps_hyp": 0.1}
        tol.update(cfg.tolerances)
        cfg.tolerances = tol
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()
