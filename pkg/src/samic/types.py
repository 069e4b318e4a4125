"""Core value types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SamicError(Exception):
    """Base class for package errors."""


class EmptyPromptError(SamicError, ValueError):
    """Raised when an operation requires at least one point prompt."""


class DimensionError(SamicError, ValueError):
    """Raised on incompatible grid / image shapes."""


@dataclass(frozen=True)
class PointPrompt:
    """A single 2D point prompt; x is the pixel column, y the pixel row."""

    x: float
    y: float

    def inside(self, height: int, width: int) -> bool:
        return 0 <= self.x < width and 0 <= self.y < height


@dataclass
class PromptSet:
    """Point prompts grouped per object instance, in submission order."""

    instances: list[list[PointPrompt]]
    image_id: str = ""

    def all_points(self) -> list[PointPrompt]:
        return [p for group in self.instances for p in group]

    def require_nonempty(self) -> None:
        if not self.instances or not any(self.instances):
            raise EmptyPromptError("prompt set has no points")


@dataclass
class SaliencyHeatmap:
    """H×W grid in [0,1]; unless identically zero, the maximum entry is 1."""

    grid: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 2:
            raise DimensionError(f"heatmap grid must be 2D, got {self.grid.shape}")

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    def validate(self) -> "SaliencyHeatmap":
        g = self.grid
        if g.min() < 0.0 or g.max() > 1.0:
            raise ValueError("heatmap entries must lie in [0,1]")
        m = g.max()
        if m > 0.0 and abs(m - 1.0) > 1e-9:
            raise ValueError("non-zero heatmap must be max-normalized")
        return self


@dataclass(frozen=True)
class HeatmapConfig:
    """Knobs for the prompt/heatmap codec."""

    sigma: float = 0.02       # Gaussian diffuseness in normalized coordinates
    tau: float = 0.5          # binarization threshold for peak extraction
    connectivity: int = 8     # 4 or 8

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0,1)")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


@dataclass
class SegmentationResult:
    """Binary mask plus the segmenter's ambiguity-aware confidence."""

    mask: np.ndarray
    confidence: float
    prompts: PromptSet | None = None

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if not np.isfinite(self.confidence):
            raise ValueError("confidence must be finite")


@dataclass
class PeakResult:
    """Peaks extracted from a heatmap; `fallback` marks the global-argmax path."""

    points: list[PointPrompt]
    fallback: bool = False

    def to_prompt_set(self, image_id: str = "") -> PromptSet:
        # One instance group per peak: disjoint components are distinct objects.
        return PromptSet(instances=[[p] for p in self.points], image_id=image_id)
