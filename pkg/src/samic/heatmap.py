"""Bidirectional codec between point prompts and saliency-like heatmaps.

Encoding places a Gaussian (in normalized coordinates, width `sigma`) around
each prompt, sums them over the integer pixel grid, and divides by the global
maximum. Decoding binarizes at `tau`, labels connected components, and returns
each component's moment centroid at sub-pixel precision.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .types import (
    DimensionError,
    EmptyPromptError,
    HeatmapConfig,
    PeakResult,
    PointPrompt,
    SaliencyHeatmap,
)


def encode_prompts(
    points: list[PointPrompt],
    height: int,
    width: int,
    config: HeatmapConfig = HeatmapConfig(),
) -> SaliencyHeatmap:
    """Max-normalized sum of prompt-centered Gaussians on the pixel grid."""
    if not points:
        raise EmptyPromptError("cannot encode an empty prompt list")
    if height < 1 or width < 1:
        raise DimensionError("heatmap dimensions must be >= 1")
    xs = np.ascontiguousarray([p.x for p in points], dtype=np.float64)
    ys = np.ascontiguousarray([p.y for p in points], dtype=np.float64)
    grid = kernels.gaussian_sum(xs, ys, height, width, config.sigma)
    grid /= grid.max()
    return SaliencyHeatmap(grid)


def extract_peaks(
    heatmap: SaliencyHeatmap,
    config: HeatmapConfig = HeatmapConfig(),
) -> PeakResult:
    """Binarize, label components, and return moment centroids.

    Components come back in row-major order of their topmost-leftmost pixel.
    When no pixel reaches `tau` the global argmax pixel (row-major first on
    ties) is returned, flagged as a fallback, so downstream consumers always
    receive at least one prompt.
    """
    grid = heatmap.grid
    binary = np.ascontiguousarray(grid >= config.tau, dtype=np.uint8)
    if not binary.any():
        flat = int(np.argmax(grid))
        y, x = divmod(flat, grid.shape[1])
        return PeakResult(points=[PointPrompt(float(x), float(y))], fallback=True)

    labels, count = kernels.label_components(binary, config.connectivity)
    flat_labels = labels.ravel()
    ys, xs = np.indices(grid.shape)
    area = np.bincount(flat_labels, minlength=count + 1)[1:]
    mx = np.bincount(flat_labels, weights=xs.ravel(), minlength=count + 1)[1:]
    my = np.bincount(flat_labels, weights=ys.ravel(), minlength=count + 1)[1:]
    points = [
        PointPrompt(float(mx[i] / area[i]), float(my[i] / area[i]))
        for i in range(count)
    ]
    return PeakResult(points=points, fallback=False)


def average_heatmaps(maps: list[SaliencyHeatmap]) -> SaliencyHeatmap:
    """Element-wise mean of K heatmaps, re-max-normalized."""
    if not maps:
        raise EmptyPromptError("cannot average an empty heatmap list")
    shape = maps[0].grid.shape
    for m in maps[1:]:
        if m.grid.shape != shape:
            raise DimensionError(f"heatmap shapes differ: {m.grid.shape} vs {shape}")
    mean = np.mean([m.grid for m in maps], axis=0)
    peak = mean.max()
    if peak > 0:
        mean = mean / peak
    return SaliencyHeatmap(mean)
