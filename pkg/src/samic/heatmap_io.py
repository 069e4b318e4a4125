"""Serialization of heatmaps: 16-bit grayscale PNG and a raw float32 grid."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .types import SaliencyHeatmap

_RAW_HEADER = struct.Struct("<II")  # u32 height, u32 width, little-endian


def save_png(heatmap: SaliencyHeatmap, path: str | Path) -> None:
    """Write value = round(65535 * g) as 16-bit grayscale."""
    scaled = np.round(heatmap.grid * 65535.0).astype(np.uint16)
    Image.fromarray(scaled).save(str(path), format="PNG")


def load_png(path: str | Path) -> SaliencyHeatmap:
    img = Image.open(str(path))
    arr = np.asarray(img, dtype=np.float64)
    if img.mode == "I;16" or img.mode == "I":
        arr = arr / 65535.0
    elif img.mode == "L":
        arr = arr / 255.0
    else:
        raise ValueError(f"unsupported heatmap PNG mode {img.mode!r}")
    return SaliencyHeatmap(np.clip(arr, 0.0, 1.0))


def save_raw(heatmap: SaliencyHeatmap, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_RAW_HEADER.pack(heatmap.height, heatmap.width))
        fh.write(heatmap.grid.astype("<f4").tobytes())


def load_raw(path: str | Path) -> SaliencyHeatmap:
    data = Path(path).read_bytes()
    h, w = _RAW_HEADER.unpack_from(data)
    grid = np.frombuffer(data, dtype="<f4", offset=_RAW_HEADER.size)
    if grid.size != h * w:
        raise ValueError(f"raw heatmap payload has {grid.size} values, expected {h * w}")
    return SaliencyHeatmap(grid.reshape(h, w).astype(np.float64))
