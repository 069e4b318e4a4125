"""Synthetic flat-region shape scenes for desk-scale benchmarks.

Every image has a flat background, one or two instances of its class (a
shape/color combination) and up to two distractor shapes from other classes.
Regions are flat-colored and pairwise disjoint, so the mock segmenter's
flood fill recovers each instance exactly from a single interior point; the
ground-truth prompts are the instance centroids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .types import PointPrompt, PromptSet

SHAPES = ("disk", "square")
CLASS_COLORS = (
    (220, 40, 40),
    (40, 180, 60),
    (50, 80, 220),
    (230, 200, 40),
    (200, 60, 200),
    (50, 200, 210),
)


@dataclass
class SyntheticItem:
    item_id: str
    class_id: str
    split: str
    image: np.ndarray                  # HWC uint8
    mask: np.ndarray                   # bool, union of class instances
    prompts: PromptSet                 # one single-point group per instance


@dataclass
class ClassSpec:
    name: str
    shape: str
    color: tuple[int, int, int]


def class_specs(n_classes: int = 6) -> list[ClassSpec]:
    if not 2 <= n_classes <= len(CLASS_COLORS):
        raise ValueError(f"n_classes must lie in [2, {len(CLASS_COLORS)}]")
    return [
        ClassSpec(f"class{i}", SHAPES[i % len(SHAPES)], CLASS_COLORS[i])
        for i in range(n_classes)
    ]


def _shape_mask(shape: str, size: int, cx: float, cy: float, r: float) -> np.ndarray:
    ys, xs = np.indices((size, size))
    if shape == "disk":
        return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    return (np.abs(xs - cx) <= r) & (np.abs(ys - cy) <= r)


def _place(rng, size, radii, existing, margin=6, tries=200):
    """Pick a center keeping the bounding circle inside and off other shapes."""
    r = radii
    for _ in range(tries):
        cx = rng.uniform(r + 2, size - r - 3)
        cy = rng.uniform(r + 2, size - r - 3)
        ok = all(math.hypot(cx - ex, cy - ey) > r + er + margin
                 for ex, ey, er in existing)
        if ok:
            return cx, cy
    return None


def generate_dataset(n_images: int, image_size: int = 128, n_classes: int = 6,
                     seed: int = 0, test_fraction: float = 0.3) -> list[SyntheticItem]:
    """Deterministic scene list; classes and splits are balanced round-robin."""
    specs = class_specs(n_classes)
    rng = np.random.default_rng(seed)
    items = []
    per_class_counts = [0] * n_classes
    for idx in range(n_images):
        ci = idx % n_classes
        spec = specs[ci]
        per_class_counts[ci] += 1
        background = int(rng.integers(185, 235))
        image = np.full((image_size, image_size, 3), background, dtype=np.uint8)
        placed: list[tuple[float, float, float]] = []

        n_instances = int(rng.integers(1, 3))
        r_lo, r_hi = image_size * 0.07, image_size * 0.14
        instance_masks = []
        prompts = []
        for _ in range(n_instances):
            r = rng.uniform(r_lo, r_hi)
            spot = _place(rng, image_size, r, placed)
            if spot is None:
                continue
            cx, cy = spot
            placed.append((cx, cy, r))
            m = _shape_mask(spec.shape, image_size, cx, cy, r)
            image[m] = spec.color
            instance_masks.append(m)
            ys, xs = np.nonzero(m)
            prompts.append([PointPrompt(float(xs.mean()), float(ys.mean()))])

        for _ in range(int(rng.integers(0, 3))):
            other = specs[int(rng.integers(0, n_classes - 1))]
            if other.name == spec.name:
                other = specs[(specs.index(other) + 1) % n_classes]
            r = rng.uniform(r_lo, r_hi)
            spot = _place(rng, image_size, r, placed)
            if spot is None:
                continue
            cx, cy = spot
            placed.append((cx, cy, r))
            image[_shape_mask(other.shape, image_size, cx, cy, r)] = other.color

        mask = np.any(instance_masks, axis=0) if instance_masks else np.zeros(
            (image_size, image_size), dtype=bool)
        split = "test" if (per_class_counts[ci] % round(1 / test_fraction)) == 0 else "train"
        items.append(SyntheticItem(
            item_id=f"synthetic-{idx:04d}",
            class_id=spec.name,
            split=split,
            image=image,
            mask=mask,
            prompts=PromptSet(instances=prompts, image_id=f"synthetic-{idx:04d}"),
        ))
    return [it for it in items if it.prompts.instances]


def items_by_class(items: list[SyntheticItem], split: str | None = None):
    grouped: dict[str, list[SyntheticItem]] = {}
    for it in items:
        if split is None or it.split == split:
            grouped.setdefault(it.class_id, []).append(it)
    return grouped
