"""K-shot evaluation: predict, average, extract peaks, segment, score."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..heatmap import average_heatmaps, extract_peaks
from ..net.model import CorrelationNet, predict_heatmap
from ..segmenter.base import SegmenterBackend, segment_instances
from ..evaluation.metrics import miou
from ..types import HeatmapConfig, PromptSet, SaliencyHeatmap
from .episodes import scale_point


@dataclass
class KShotReport:
    per_class_iou: dict[str, float]
    mean_iou: float
    fallback_count: int = 0
    items_evaluated: int = 0
    extras: dict = field(default_factory=dict)


def model_predictor(model: CorrelationNet,
                    heatmap_config: HeatmapConfig = HeatmapConfig()):
    def predict(context_item, target_item) -> SaliencyHeatmap:
        return predict_heatmap(model, context_item.image, context_item.prompts,
                               target_item.image, heatmap_config)
    return predict


def oracle_predictor(input_size, heatmap_config: HeatmapConfig = HeatmapConfig()):
    """Upper-bound predictor: injects the target's ground-truth heatmap."""
    from .episodes import prompts_to_heatmap

    def predict(context_item, target_item) -> SaliencyHeatmap:
        return prompts_to_heatmap(target_item.prompts,
                                  target_item.image.shape[:2],
                                  input_size, heatmap_config)
    return predict


def evaluate_kshot(predictor, train_grouped: dict[str, list],
                   test_grouped: dict[str, list], backend: SegmenterBackend,
                   shots: int = 1, input_size=(128, 128),
                   heatmap_config: HeatmapConfig = HeatmapConfig(),
                   seed: int = 0) -> KShotReport:
    """Score every test item against its class's context pool.

    `predictor` maps (context_item, target_item) to a SaliencyHeatmap at
    network resolution; pass `model_predictor(model)` for the trained path.
    Context shots are the first K items of a seeded shuffle of the class's
    training pool. Peaks become one instance group per component; fallback
    peaks are counted in the report.
    """
    rng = np.random.default_rng(seed)
    per_class: dict[str, list[float]] = {}
    fallbacks = 0
    n_items = 0
    for name in sorted(test_grouped):
        pool = train_grouped.get(name, [])
        if not pool:
            continue
        order = rng.permutation(len(pool))
        contexts = [pool[i] for i in order[:max(shots, 1)]]
        for target in test_grouped[name]:
            maps = [predictor(ctx, target) for ctx in contexts]
            merged = average_heatmaps(maps)
            peaks = extract_peaks(merged, heatmap_config)
            if peaks.fallback:
                fallbacks += 1
            native_hw = target.image.shape[:2]
            groups = [[scale_point(p, (merged.height, merged.width), native_hw)]
                      for p in peaks.points]
            result = segment_instances(backend, target.image, PromptSet(groups))
            score = miou(result.mask, target.mask)
            per_class.setdefault(name, []).append(score)
            n_items += 1
    per_class_iou = {k: float(np.mean(v)) for k, v in per_class.items()}
    mean_iou = float(np.mean(list(per_class_iou.values()))) if per_class_iou else 0.0
    return KShotReport(per_class_iou=per_class_iou, mean_iou=mean_iou,
                       fallback_count=fallbacks, items_evaluated=n_items)
