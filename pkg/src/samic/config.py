"""Configuration surfaces for the network and the training regime.

Field names mirror the CLI flags and config-file keys one-to-one; files may
be TOML or JSON, and CLI flags override file values.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    tomllib = None
from pathlib import Path

from .types import SamicError


class ConfigurationError(SamicError, ValueError):
    pass


@dataclass
class NetConfig:
    backbone_id: str = "tiny"
    input_size: tuple[int, int] = (224, 224)
    num_4dconv_layers: int = 3
    group_norm_groups: int = 4
    decoder_channels: list[int] = field(default_factory=lambda: [64, 32])
    conv4d_mode: str = "dense"       # or "center_pivot"
    init_seed: int = 31              # weight init seed for reproducible fixtures

    def __post_init__(self):
        if self.num_4dconv_layers < 1:
            raise ConfigurationError("num_4dconv_layers must be >= 1")
        if self.conv4d_mode not in ("dense", "center_pivot"):
            raise ConfigurationError(f"unknown conv4d_mode {self.conv4d_mode!r}")
        self.input_size = tuple(self.input_size)


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 4
    max_epochs: int = 300
    patience: int = 10
    subsample_fraction: float = 0.2
    seed: int = 0
    shots: int = 1
    min_improvement: float = 1e-5    # absolute drop in epoch-mean loss that counts
    deterministic: bool = False

    def __post_init__(self):
        if not 0 < self.subsample_fraction <= 1:
            raise ConfigurationError("subsample_fraction must lie in (0,1]")
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")
        if self.lr <= 0:
            raise ConfigurationError("lr must be positive")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ConfigurationError("batch_size and max_epochs must be >= 1")


def _load_mapping(path: str | Path) -> dict:
    path = Path(path)
    if path.suffix == ".toml":
        if tomllib is None:
            raise ConfigurationError(
                "TOML configs need Python 3.11+ (tomllib); use JSON instead")
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    return json.loads(path.read_text())


def _build(cls, data: dict, overrides: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    merged = {k: v for k, v in data.items() if k in names}
    unknown = set(data) - names
    if unknown:
        raise ConfigurationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    merged.update({k: v for k, v in overrides.items() if k in names and v is not None})
    return cls(**merged)


def load_configs(path: str | Path | None, **overrides) -> tuple[NetConfig, TrainConfig]:
    """Load [net] and [train] sections; `overrides` apply on top of the file."""
    data = _load_mapping(path) if path else {}
    net = _build(NetConfig, data.get("net", {}), overrides)
    train = _build(TrainConfig, data.get("train", {}), overrides)
    return net, train
