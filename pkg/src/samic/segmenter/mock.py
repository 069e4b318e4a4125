"""Deterministic mock segmenter for desk-scale tests.

Images are treated as synthetic scenes of flat-colored regions. A point
prompt selects the connected region of near-equal color (per-channel
difference <= 1 on the 0..255 scale) containing it; multiple points select
the union of their regions.

Confidence follows the closed form 1.01 * (1 - exp(-n)), where n is the
largest number of prompts landing in a single region, so it is monotone
non-decreasing in the prompt count and saturates just above 1. Every result
is a pure function of (image bytes, points), making mock-based fixtures
re-derivable.
"""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..types import PointPrompt, SegmentationResult
from .base import SegmenterBackend, check_points

COLOR_TOLERANCE = 1  # out of 255


class MockSegmenter(SegmenterBackend):
    producer_id = "mock"

    def _region_labels(self, image: np.ndarray, color: np.ndarray):
        close = (np.abs(image.astype(np.int16) - color.astype(np.int16)).max(axis=2)
                 <= COLOR_TOLERANCE)
        return kernels.label_components(np.ascontiguousarray(close, dtype=np.uint8), 8)

    def segment(self, image: np.ndarray, points: list[PointPrompt]) -> SegmentationResult:
        image = np.asarray(image)
        if image.ndim == 2:
            image = np.stack([image] * 3, axis=-1)
        check_points(image, points)
        mask = np.zeros(image.shape[:2], dtype=bool)
        label_cache: dict[tuple, np.ndarray] = {}
        region_counts: dict[tuple, int] = {}
        for p in points:
            iy, ix = int(p.y), int(p.x)
            color = image[iy, ix]
            key = tuple(int(c) for c in color)
            if key not in label_cache:
                label_cache[key], _ = self._region_labels(image, color)
            labels = label_cache[key]
            region = (key, int(labels[iy, ix]))
            region_counts[region] = region_counts.get(region, 0) + 1
            mask |= labels == labels[iy, ix]
        n = max(region_counts.values())
        confidence = 1.01 * (1.0 - math.exp(-n))
        return SegmentationResult(mask=mask, confidence=confidence)

    def embed(self, image: np.ndarray) -> np.ndarray:
        """4x4 block-mean color embedding, shape (3, H//4, W//4)."""
        image = np.asarray(image, dtype=np.float32)
        if image.ndim == 2:
            image = np.stack([image] * 3, axis=-1)
        h, w = image.shape[:2]
        h4, w4 = h - h % 4, w - w % 4
        blocks = image[:h4, :w4].reshape(h4 // 4, 4, w4 // 4, 4, 3)
        return blocks.mean(axis=(1, 3)).transpose(2, 0, 1) / 255.0
