"""Dataset manifest loading and validation.

A manifest is a JSON file listing classes and items:

    {"classes": ["disk0", ...],
     "items": [{"id": "...", "class": "disk0", "split": "train",
                "image": "images/x.png", "prompts": "prompts/x.json",
                "mask": "masks/x.png"}, ...]}

Paths are relative to the manifest's directory. Splits are class-level:
a class must not appear in both train and test.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..types import PointPrompt, PromptSet, SamicError

VALID_SPLITS = ("train", "val", "test")

BENCHMARK_CLASS_COUNTS = {
    "fss1000": {"train": 520, "val": 240, "test": 240},
}


class ManifestError(SamicError, ValueError):
    """Manifest fails schema or consistency validation."""


@dataclass(frozen=True)
class DatasetItem:
    item_id: str
    class_id: str
    split: str
    image_path: Path
    prompts_path: Path
    mask_path: Path | None
    sequence: str | None = None
    frame: int | None = None

    @property
    def image(self) -> np.ndarray:
        return np.asarray(Image.open(self.image_path).convert("RGB"))

    @property
    def mask(self) -> np.ndarray:
        if self.mask_path is None:
            raise ManifestError(f"item {self.item_id} has no mask")
        return np.asarray(Image.open(self.mask_path).convert("L")) >= 128

    @property
    def prompts(self) -> PromptSet:
        data = json.loads(self.prompts_path.read_text())
        groups = [[PointPrompt(float(x), float(y)) for x, y in inst]
                  for inst in data["instances"]]
        return PromptSet(groups, image_id=data.get("image", self.item_id))


@dataclass
class DatasetIndex:
    classes: list[str]
    items: list[DatasetItem]
    root: Path

    def by_split(self, split: str) -> dict[str, list[DatasetItem]]:
        grouped: dict[str, list[DatasetItem]] = defaultdict(list)
        for it in self.items:
            if it.split == split:
                grouped[it.class_id].append(it)
        return dict(grouped)


def load_split_manifest(path: str | Path, benchmark: str | None = None) -> DatasetIndex:
    """Load and validate a manifest; every problem found is reported at once."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    root = path.parent
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}")

    if not isinstance(data.get("classes"), list) or not isinstance(data.get("items"), list):
        raise ManifestError("manifest must contain 'classes' and 'items' lists")

    classes = [str(c) for c in data["classes"]]
    known = set(classes)
    problems: list[str] = []
    missing_files: list[str] = []
    class_splits: dict[str, set[str]] = defaultdict(set)
    seen_ids: Counter = Counter()
    items: list[DatasetItem] = []

    for i, raw in enumerate(data["items"]):
        label = raw.get("id", f"items[{i}]")
        for key in ("id", "class", "split", "image", "prompts"):
            if key not in raw:
                problems.append(f"{label}: missing field '{key}'")
        if problems and "id" not in raw:
            continue
        cls, split = str(raw.get("class")), str(raw.get("split"))
        if cls not in known:
            problems.append(f"{label}: unknown class '{cls}'")
        if split not in VALID_SPLITS:
            problems.append(f"{label}: invalid split '{split}'")
        else:
            class_splits[cls].add(split)
        seen_ids[str(raw.get("id"))] += 1

        paths = {}
        for key in ("image", "prompts", "mask"):
            if raw.get(key) is None:
                paths[key] = None
                continue
            p = root / raw[key]
            if not p.exists():
                missing_files.append(f"{label}: {key} file missing: {p}")
            paths[key] = p
        if paths.get("image") and paths.get("prompts"):
            items.append(DatasetItem(
                item_id=str(raw["id"]), class_id=cls, split=split,
                image_path=paths["image"], prompts_path=paths["prompts"],
                mask_path=paths.get("mask"),
                sequence=raw.get("sequence"), frame=raw.get("frame")))

    for item_id, n in seen_ids.items():
        if n > 1:
            problems.append(f"duplicate item id '{item_id}' ({n} occurrences)")

    overlap = sorted(c for c, splits in class_splits.items()
                     if "train" in splits and "test" in splits)
    if overlap:
        problems.append(
            "classes appear in both train and test splits: " + ", ".join(overlap))

    if benchmark:
        expected = BENCHMARK_CLASS_COUNTS.get(benchmark)
        if expected is None:
            problems.append(f"unknown benchmark id '{benchmark}'")
        else:
            got = Counter()
            for cls, splits in class_splits.items():
                for s in splits:
                    got[s] += 1
            for split, want in expected.items():
                if got.get(split, 0) != want:
                    problems.append(
                        f"benchmark '{benchmark}' expects {want} {split} "
                        f"classes, manifest has {got.get(split, 0)}")

    problems.extend(missing_files)
    if problems:
        raise ManifestError(
            f"manifest {path} has {len(problems)} problem(s):\n  "
            + "\n  ".join(problems))
    return DatasetIndex(classes=classes, items=items, root=root)
