"""SAMIC: in-context spatial prompt engineering for promptable segmenters."""

__version__ = "0.1.0"

from .types import (
    HeatmapConfig,
    PeakResult,
    PointPrompt,
    PromptSet,
    SaliencyHeatmap,
    SegmentationResult,
)
from .heatmap import average_heatmaps, encode_prompts, extract_peaks

__all__ = [
    "HeatmapConfig",
    "PeakResult",
    "PointPrompt",
    "PromptSet",
    "SaliencyHeatmap",
    "SegmentationResult",
    "average_heatmaps",
    "encode_prompts",
    "extract_peaks",
]
