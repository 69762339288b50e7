"""Run configuration shared by the command-line subcommands.

A config file is a JSON object whose keys are a subset of ``RunConfig``
fields. Command-line flags override the file, the file overrides the
defaults below, and unknown keys are rejected before anything runs.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .decoder import ACTIVATIONS, ALPHA_GRID, BEAM_GRID, CELLS, DEFAULT_EMBED, DEFAULT_HIDDEN, DEFAULT_MAX_LEN
from .encoder import DEFAULT_DIM, ENCODER_MODELS
from .numeric import DEFAULT_LR


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    d: int = DEFAULT_DIM
    hidden: int = DEFAULT_HIDDEN
    embed: int = DEFAULT_EMBED
    lr: float = DEFAULT_LR
    encoder_epochs: int = 20
    epochs: int = 800
    min_freq: int = 3
    max_len: int = DEFAULT_MAX_LEN
    beam_sizes: list = field(default_factory=lambda: list(BEAM_GRID))
    alphas: list = field(default_factory=lambda: list(ALPHA_GRID))
    ratios: list = field(default_factory=lambda: [0.8, 0.1, 0.1])
    model: str = "avg"
    cell: str = "gru"
    activation: str = "tanh"
    no_ident: bool = False
    expand_abbrev: bool = False
    n: int = 2
    instances: int = 50

    def validate(self) -> "RunConfig":
        ints = ("seed", "d", "hidden", "embed", "encoder_epochs", "epochs", "min_freq", "max_len", "n",
                "instances")
        for name in ints:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            if name != "seed" and value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if not isinstance(self.lr, (int, float)) or isinstance(self.lr, bool) or not self.lr > 0:
            raise ConfigError(f"lr must be a positive number, got {self.lr!r}")
        if not self.beam_sizes or any(not isinstance(b, int) or b < 1 for b in self.beam_sizes):
            raise ConfigError(f"beam_sizes must be positive integers, got {self.beam_sizes!r}")
        if not self.alphas or any(not isinstance(a, (int, float)) or not 0 <= a <= 1 for a in self.alphas):
            raise ConfigError(f"alphas must lie in [0, 1], got {self.alphas!r}")
        if (len(self.ratios) != 3 or any(not isinstance(r, (int, float)) or r <= 0 for r in self.ratios)
                or abs(sum(self.ratios) - 1.0) > 1e-9):
            raise ConfigError(f"ratios must be three positive numbers summing to 1, got {self.ratios!r}")
        for name, allowed in (("model", ENCODER_MODELS), ("cell", CELLS), ("activation", ACTIVATIONS)):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        for name in ("no_ident", "expand_abbrev"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be true or false")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


FIELDS = tuple(f.name for f in fields(RunConfig))


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the optional JSON file, then non-None ``overrides``."""
    values: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc.msg})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        unknown = sorted(set(doc) - set(FIELDS))
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {unknown}")
        values.update(doc)
    for key, value in (overrides or {}).items():
        if key not in FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            values[key] = value
    return RunConfig(**values).validate()
