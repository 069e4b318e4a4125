"""Region and boundary metrics: mIoU for masks, J & F for video sequences.

The boundary F-measure follows the VOS convention: boundary pixels of the
two masks are matched within a distance tolerance of 0.8% of the image
diagonal (rounded up, never below one pixel).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..types import DimensionError

_EROSION_STRUCTURE = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _as_binary(mask) -> np.ndarray:
    arr = np.asarray(mask)
    return arr.astype(bool)


def miou(pred, gt) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    p, g = _as_binary(pred), _as_binary(gt)
    if p.shape != g.shape:
        raise DimensionError(f"mask shapes differ: {p.shape} vs {g.shape}")
    union = np.logical_or(p, g).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(p, g).sum() / union)


def default_boundary_tolerance(shape) -> int:
    return max(1, math.ceil(0.008 * math.hypot(*shape)))


def mask_boundary(mask: np.ndarray) -> np.ndarray:
    m = _as_binary(mask)
    eroded = ndimage.binary_erosion(m, structure=_EROSION_STRUCTURE, border_value=0)
    return m & ~eroded


def boundary_f(pred, gt, tolerance: int | None = None) -> float:
    """Boundary F-measure with distance-tolerance matching."""
    p, g = _as_binary(pred), _as_binary(gt)
    if p.shape != g.shape:
        raise DimensionError(f"mask shapes differ: {p.shape} vs {g.shape}")
    tol = tolerance if tolerance is not None else default_boundary_tolerance(p.shape)
    pb, gb = mask_boundary(p), mask_boundary(g)
    if not pb.any() and not gb.any():
        return 1.0
    if not pb.any() or not gb.any():
        return 0.0
    dist_to_gt = ndimage.distance_transform_edt(~gb)
    dist_to_pred = ndimage.distance_transform_edt(~pb)
    precision = float((dist_to_gt[pb] <= tol).mean())
    recall = float((dist_to_pred[gb] <= tol).mean())
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class MetricReport:
    per_class_iou: dict[str, float] = field(default_factory=dict)
    mean_iou: float | None = None
    j_mean: float | None = None
    f_mean: float | None = None
    j_and_f: float | None = None
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)

    def render_table(self) -> str:
        lines = []
        header = f"{'class':<16}{'mIoU':>8}"
        lines.append(header)
        lines.append("-" * len(header))
        for name in sorted(self.per_class_iou):
            lines.append(f"{name:<16}{self.per_class_iou[name]:>8.3f}")
        if self.mean_iou is not None:
            lines.append(f"{'mean':<16}{self.mean_iou:>8.3f}")
        if self.j_and_f is not None:
            lines.append(f"J {self.j_mean:.3f}  F {self.f_mean:.3f}  "
                         f"J&F {self.j_and_f:.3f}")
        return "\n".join(lines)


def aggregate_iou(per_class_scores: dict[str, list[float]], **metadata) -> MetricReport:
    per_class = {k: float(np.mean(v)) for k, v in per_class_scores.items() if v}
    mean = float(np.mean(list(per_class.values()))) if per_class else 0.0
    return MetricReport(per_class_iou=per_class, mean_iou=mean, metadata=metadata)


def j_and_f(pred_sequence, gt_sequence, tolerance: int | None = None) -> MetricReport:
    """Per-frame region J and boundary F; report carries the sequence means."""
    if len(pred_sequence) != len(gt_sequence):
        raise DimensionError("sequence lengths differ")
    js = [miou(p, g) for p, g in zip(pred_sequence, gt_sequence)]
    fs = [boundary_f(p, g, tolerance) for p, g in zip(pred_sequence, gt_sequence)]
    jm, fm = float(np.mean(js)), float(np.mean(fs))
    return MetricReport(j_mean=jm, f_mean=fm, j_and_f=(jm + fm) / 2,
                        metadata={"tolerance": tolerance, "frames": len(js)})
