"""Episode sampling and deterministic per-class subsampling."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import torch

from ..heatmap import encode_prompts
from ..net.model import image_to_tensor
from ..types import HeatmapConfig, PointPrompt, PromptSet, SaliencyHeatmap

log = logging.getLogger(__name__)


@dataclass
class Episode:
    """One (context, target) pair drawn from a single class."""

    context_image: np.ndarray
    context_prompts: PromptSet
    target_image: np.ndarray
    target_gt_heatmap: SaliencyHeatmap      # at network input resolution
    target_gt_mask: np.ndarray              # native resolution
    class_id: str
    split: str = "train"


def scale_point(p: PointPrompt, from_hw, to_hw) -> PointPrompt:
    """Half-pixel-centered coordinate rescaling between image resolutions."""
    fh, fw = from_hw
    th, tw = to_hw
    x = (p.x + 0.5) * tw / fw - 0.5
    y = (p.y + 0.5) * th / fh - 0.5
    return PointPrompt(min(max(x, 0.0), tw - 1.0), min(max(y, 0.0), th - 1.0))


def prompts_to_heatmap(prompts: PromptSet, native_hw, input_size,
                       config: HeatmapConfig) -> SaliencyHeatmap:
    """Encode a prompt set at network resolution (coordinates rescaled)."""
    points = [scale_point(p, native_hw, input_size) for p in prompts.all_points()]
    return encode_prompts(points, input_size[0], input_size[1], config)


def subsample_training_set(grouped: dict[str, list], fraction: float,
                           seed: int) -> dict[str, list]:
    """Per class, keep exactly ceil(fraction * n) items via a seeded shuffle.

    Deterministic for a fixed seed; selected items keep their original order.
    Empty classes are skipped with a warning.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0,1]")
    out: dict[str, list] = {}
    for ci, name in enumerate(sorted(grouped)):
        items = grouped[name]
        if not items:
            log.warning("class %s is empty; skipped during subsampling", name)
            continue
        k = math.ceil(fraction * len(items))
        rng = np.random.default_rng([seed, ci])
        order = rng.permutation(len(items))[:k]
        out[name] = [items[i] for i in sorted(order)]
    return out


def sample_episode(grouped: dict[str, list], rng: np.random.Generator):
    """Draw (context, target) without replacement from one class.

    Classes need >= 2 items; singleton classes are skipped. For video-style
    items (carrying `sequence` and `frame` attributes) the pair is the
    adjacent (t-1, t) frame pair within a sequence.
    """
    eligible = [name for name in sorted(grouped) if len(grouped[name]) >= 2]
    if not eligible:
        raise ValueError("no class has two or more items")
    name = eligible[int(rng.integers(len(eligible)))]
    items = grouped[name]
    if getattr(items[0], "sequence", None) is not None:
        pairs = video_pairs(items)
        ctx, tgt = pairs[int(rng.integers(len(pairs)))]
        return ctx, tgt
    i, j = rng.choice(len(items), size=2, replace=False)
    return items[int(i)], items[int(j)]


def video_pairs(items: list) -> list[tuple]:
    """Causal (frame t-1 -> frame t) pairs per sequence."""
    by_seq: dict[str, list] = {}
    for it in items:
        by_seq.setdefault(it.sequence, []).append(it)
    pairs = []
    for seq in sorted(by_seq):
        frames = sorted(by_seq[seq], key=lambda it: it.frame)
        pairs.extend(zip(frames[:-1], frames[1:]))
    if not pairs:
        raise ValueError("no adjacent frame pairs available")
    return pairs


def build_episode(context, target, input_size,
                  config: HeatmapConfig = HeatmapConfig()) -> Episode:
    gt = prompts_to_heatmap(target.prompts, target.image.shape[:2], input_size, config)
    return Episode(
        context_image=context.image,
        context_prompts=context.prompts,
        target_image=target.image,
        target_gt_heatmap=gt,
        target_gt_mask=target.mask,
        class_id=target.class_id,
        split=getattr(target, "split", "train"),
    )


def episode_tensors(episode: Episode, input_size,
                    config: HeatmapConfig = HeatmapConfig()):
    """(context image, context heatmap, target image, gt heatmap) tensors."""
    ci = image_to_tensor(episode.context_image, input_size)
    ti = image_to_tensor(episode.target_image, input_size)
    ch = prompts_to_heatmap(episode.context_prompts,
                            episode.context_image.shape[:2], input_size, config)
    chm = torch.from_numpy(ch.grid).float().unsqueeze(0)
    gt = torch.from_numpy(episode.target_gt_heatmap.grid).float().unsqueeze(0)
    return ci, chm, ti, gt
