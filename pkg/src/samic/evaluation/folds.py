"""Class-level cross-validation folds."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FoldSpec:
    classes: tuple[str, ...]
    fold_count: int
    fold_index: int

    @property
    def test_classes(self) -> tuple[str, ...]:
        return self.classes[self.fold_index::self.fold_count]

    @property
    def train_classes(self) -> tuple[str, ...]:
        test = set(self.test_classes)
        return tuple(c for c in self.classes if c not in test)


def make_folds(classes: list[str], k: int) -> list[FoldSpec]:
    """Deterministic, order-stable partition; remainders spread round-robin."""
    if k > len(classes):
        raise ValueError(f"cannot split {len(classes)} classes into {k} folds")
    classes = tuple(classes)
    return [FoldSpec(classes=classes, fold_count=k, fold_index=i) for i in range(k)]
