"""Backend interface for promptable segmenters."""

from __future__ import annotations

import abc

import numpy as np

from ..types import EmptyPromptError, PointPrompt, PromptSet, SamicError, SegmentationResult


class BackendUnavailableError(SamicError, RuntimeError):
    """The requested segmenter backend cannot be loaded."""


class SegmenterBackend(abc.ABC):
    """Stateless promptable segmenter; instances are reentrant."""

    producer_id: str

    @abc.abstractmethod
    def embed(self, image: np.ndarray) -> np.ndarray:
        """Return a (C, h, w) float32 embedding of an HWC uint8 image."""

    @abc.abstractmethod
    def segment(self, image: np.ndarray, points: list[PointPrompt]) -> SegmentationResult:
        """Binary mask plus ambiguity-aware confidence for positive points."""


def check_points(image: np.ndarray, points: list[PointPrompt]) -> None:
    if not points:
        raise EmptyPromptError("segmentation needs at least one point prompt")
    h, w = image.shape[:2]
    for p in points:
        if not p.inside(h, w):
            raise ValueError(f"prompt ({p.x}, {p.y}) outside {h}x{w} image")


def segment_instances(backend: SegmenterBackend, image: np.ndarray,
                      prompts: PromptSet) -> SegmentationResult:
    """Per-instance segmentation, masks unioned, confidence = min over groups."""
    groups = [g for g in prompts.instances if g]
    if not groups:
        raise EmptyPromptError("prompt set has no instance groups with points")
    mask = np.zeros(image.shape[:2], dtype=bool)
    confidence = float("inf")
    for group in groups:
        result = backend.segment(image, group)
        mask |= result.mask
        confidence = min(confidence, result.confidence)
    return SegmentationResult(mask=mask, confidence=confidence, prompts=prompts)
