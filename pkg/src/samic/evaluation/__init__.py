from .folds import FoldSpec, make_folds
from .manifest import (
    DatasetIndex,
    DatasetItem,
    ManifestError,
    load_split_manifest,
)
from .metrics import (
    MetricReport,
    aggregate_iou,
    boundary_f,
    default_boundary_tolerance,
    j_and_f,
    mask_boundary,
    miou,
)

__all__ = [
    "DatasetIndex",
    "DatasetItem",
    "FoldSpec",
    "ManifestError",
    "MetricReport",
    "aggregate_iou",
    "boundary_f",
    "default_boundary_tolerance",
    "j_and_f",
    "load_split_manifest",
    "make_folds",
    "mask_boundary",
    "miou",
]
