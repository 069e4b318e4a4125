"""Versioned weight checkpoints.

A checkpoint is a zip archive: a MAGIC entry ("SAMIC-CKPT-1"), config.json
with the NetConfig, and one little-endian .npy grid per named parameter.
Entries are stored uncompressed with zeroed timestamps so identical weights
always produce byte-identical archives.
"""

from __future__ import annotations

import dataclasses
import io
import json
import zipfile
from pathlib import Path

import numpy as np
import torch

from ..config import NetConfig
from ..types import SamicError

MAGIC = "SAMIC-CKPT-1"
_EPOCH = (1980, 1, 1, 0, 0, 0)


class CheckpointError(SamicError, ValueError):
    pass


def _write_entry(zf: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    zf.writestr(info, payload)


def save_checkpoint(model, path: str | Path) -> None:
    names = sorted(n for n, p in model.named_parameters() if p.requires_grad)
    state = {n: p.detach().cpu().numpy() for n, p in model.named_parameters()}
    config = dataclasses.asdict(model.config)
    with zipfile.ZipFile(path, "w") as zf:
        _write_entry(zf, "MAGIC", MAGIC.encode())
        _write_entry(zf, "config.json",
                     json.dumps(config, sort_keys=True, indent=1).encode())
        for name in names:
            buf = io.BytesIO()
            np.save(buf, np.ascontiguousarray(state[name]))
            _write_entry(zf, f"params/{name}.npy", buf.getvalue())


def load_checkpoint(path: str | Path, backbone_weights: str | None = None):
    from .model import CorrelationNet

    try:
        zf = zipfile.ZipFile(path)
    except zipfile.BadZipFile as exc:
        raise CheckpointError(f"{path} is not a checkpoint archive: {exc}")
    with zf:
        names = zf.namelist()
        if "MAGIC" not in names or zf.read("MAGIC").decode() != MAGIC:
            raise CheckpointError(f"{path} is not a {MAGIC} archive")
        config = NetConfig(**json.loads(zf.read("config.json")))
        model = CorrelationNet(config, backbone_weights=backbone_weights)
        params = dict(model.named_parameters())
        for entry in names:
            if not entry.startswith("params/"):
                continue
            pname = entry[len("params/"):-len(".npy")]
            if pname not in params:
                raise CheckpointError(f"unknown parameter {pname!r} in checkpoint")
            grid = np.load(io.BytesIO(zf.read(entry)))
            with torch.no_grad():
                params[pname].copy_(torch.from_numpy(grid))
    return model
