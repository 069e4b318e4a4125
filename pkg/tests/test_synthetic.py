"""Synthetic scene generator: determinism, geometry, splits."""

import numpy as np

from samic.synthetic import class_specs, generate_dataset, items_by_class


def test_generation_is_deterministic():
    a = generate_dataset(30, image_size=64, seed=4)
    b = generate_dataset(30, image_size=64, seed=4)
    assert len(a) == len(b)
    for ia, ib in zip(a, b):
        assert ia.item_id == ib.item_id and ia.class_id == ib.class_id
        np.testing.assert_array_equal(ia.image, ib.image)
        np.testing.assert_array_equal(ia.mask, ib.mask)


def test_seed_changes_scenes():
    a = generate_dataset(6, image_size=64, seed=4)
    b = generate_dataset(6, image_size=64, seed=5)
    assert any(not np.array_equal(ia.image, ib.image) for ia, ib in zip(a, b))


def test_prompts_lie_inside_instance_masks():
    for item in generate_dataset(40, image_size=96, seed=2):
        for group in item.prompts.instances:
            for p in group:
                assert item.mask[int(round(p.y)), int(round(p.x))]


def test_mask_matches_class_color_regions():
    specs = {s.name: s for s in class_specs()}
    for item in generate_dataset(20, image_size=96, seed=9):
        color = np.array(specs[item.class_id].color, dtype=np.uint8)
        color_region = np.all(item.image == color, axis=-1)
        np.testing.assert_array_equal(item.mask, color_region)


def test_splits_cover_all_classes():
    items = generate_dataset(120, image_size=64, seed=1)
    train = items_by_class(items, "train")
    test = items_by_class(items, "test")
    assert set(train) == set(test) == {f"class{i}" for i in range(6)}
    train_ids = {it.item_id for cls in train.values() for it in cls}
    test_ids = {it.item_id for cls in test.values() for it in cls}
    assert not train_ids & test_ids
    # roughly 30% held out
    frac = len(test_ids) / (len(train_ids) + len(test_ids))
    assert 0.2 < frac < 0.4


def test_instance_count_matches_prompt_groups():
    for item in generate_dataset(30, image_size=96, seed=6):
        assert 1 <= len(item.prompts.instances) <= 2
