"""Episode construction, subsampling, and a short end-to-end training run."""

import json
import math

import numpy as np
import pytest
import torch

from samic.config import NetConfig, TrainConfig
from samic.losses import LossFlags
from samic.net.model import CorrelationNet
from samic.synthetic import generate_dataset, items_by_class
from samic.training import (
    build_episode,
    episode_tensors,
    sample_episode,
    scale_point,
    subsample_training_set,
    train,
    video_pairs,
)
from samic.types import PointPrompt


def test_scale_point_half_pixel_convention():
    p = scale_point(PointPrompt(100, 80), (96, 128), (48, 64))
    # (100 + 0.5) * 64/128 - 0.5 = 49.75, clipped to 48 - 1? no: 49.75 < 63
    assert p.x == pytest.approx(49.75)
    assert p.y == pytest.approx((80.5) * 48 / 96 - 0.5)


def test_scale_point_identity_and_clipping():
    p = PointPrompt(10.25, 3.5)
    q = scale_point(p, (64, 64), (64, 64))
    assert (q.x, q.y) == (p.x, p.y)
    edge = scale_point(PointPrompt(127.9, 0), (128, 128), (32, 32))
    assert 0 <= edge.x <= 31 and 0 <= edge.y <= 31


def test_scale_point_round_trip_error_is_small():
    p = PointPrompt(77.3, 20.9)
    back = scale_point(scale_point(p, (128, 128), (32, 32)), (32, 32), (128, 128))
    assert math.hypot(back.x - p.x, back.y - p.y) < 1e-9


def test_subsample_counts_and_determinism():
    grouped = items_by_class(generate_dataset(60, image_size=64, seed=0), "train")
    a = subsample_training_set(grouped, 0.2, seed=5)
    b = subsample_training_set(grouped, 0.2, seed=5)
    c = subsample_training_set(grouped, 0.2, seed=6)
    for name, items in grouped.items():
        assert len(a[name]) == math.ceil(0.2 * len(items))
        assert [it.item_id for it in a[name]] == [it.item_id for it in b[name]]
        # original order preserved
        ids = [it.item_id for it in items]
        picked = [it.item_id for it in a[name]]
        assert picked == sorted(picked, key=ids.index)
    assert any([it.item_id for it in a[n]] != [it.item_id for it in c[n]]
               for n in grouped)


def test_subsample_disjoint_from_test_split():
    items = generate_dataset(60, image_size=64, seed=0)
    sub = subsample_training_set(items_by_class(items, "train"), 0.3, seed=1)
    test_ids = {it.item_id for it in items if it.split == "test"}
    sub_ids = {it.item_id for cls in sub.values() for it in cls}
    assert not sub_ids & test_ids


def test_subsample_fraction_validation():
    with pytest.raises(ValueError):
        subsample_training_set({}, 0.0, seed=0)


def test_subsample_full_fraction_is_identity():
    grouped = items_by_class(generate_dataset(20, image_size=64, seed=0), "train")
    out = subsample_training_set(grouped, 1.0, seed=9)
    for name in grouped:
        assert [it.item_id for it in out[name]] == \
            [it.item_id for it in grouped[name]]


def test_sample_episode_shares_class(rng):
    grouped = items_by_class(generate_dataset(40, image_size=64, seed=0), "train")
    for _ in range(20):
        ctx, tgt = sample_episode(grouped, rng)
        assert ctx.class_id == tgt.class_id
        assert ctx.item_id != tgt.item_id


def test_video_pairs_are_causal_and_adjacent():
    class Frame:
        def __init__(self, seq, frame):
            self.sequence, self.frame = seq, frame

    frames = [Frame("a", 2), Frame("a", 0), Frame("a", 1), Frame("b", 5),
              Frame("b", 6)]
    pairs = video_pairs(frames)
    assert [(c.sequence, c.frame, t.frame) for c, t in pairs] == \
        [("a", 0, 1), ("a", 1, 2), ("b", 5, 6)]


def test_build_episode_heatmap_at_input_resolution():
    grouped = items_by_class(generate_dataset(12, image_size=96, seed=0), "train")
    name = sorted(grouped)[0]
    ctx, tgt = grouped[name][0], grouped[name][1]
    ep = build_episode(ctx, tgt, (64, 64))
    assert ep.target_gt_heatmap.grid.shape == (64, 64)
    ci, chm, ti, gt = episode_tensors(ep, (64, 64))
    assert ci.shape == (1, 3, 64, 64) and chm.shape == (1, 64, 64)
    assert gt.shape == (1, 64, 64)
    assert float(chm.max()) == pytest.approx(1.0)


@pytest.fixture(scope="module")
def short_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("short-train")
    items = generate_dataset(16, image_size=64, n_classes=2, seed=2)
    grouped = items_by_class(items, "train")
    model = CorrelationNet(NetConfig(input_size=(64, 64), num_4dconv_layers=1,
                                     conv4d_mode="center_pivot"))
    cfg = TrainConfig(seed=1, max_epochs=4, patience=3, deterministic=True)
    result = train(model, grouped, cfg,
                   flags=LossFlags(kld_sum_normalize=True), out_dir=out)
    return out, result


def test_short_training_emits_artifacts(short_run):
    out, result = short_run
    assert result.checkpoint_path.exists()
    assert result.epochs_run == 4
    assert len(result.history) == 4
    lines = [json.loads(l) for l in result.log_path.read_text().splitlines()]
    steps = [l for l in lines if "step" in l]
    summaries = [l for l in lines if "epoch_summary" in l]
    assert len(summaries) == 4
    assert {"kld", "cc", "nss", "total"} <= set(steps[0])
    assert result.best_loss <= result.history[0] + 1e-9


def test_training_requires_items():
    model = CorrelationNet(NetConfig(input_size=(64, 64), num_4dconv_layers=1,
                                     conv4d_mode="center_pivot"))
    with pytest.raises(ValueError):
        train(model, {}, TrainConfig(max_epochs=1))
