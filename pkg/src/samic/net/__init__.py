from .backbone import build_backbone, extract_feature_pyramid
from .checkpoint import load_checkpoint, save_checkpoint
from .conv4d import CenterPivotConv4d, Conv4d, make_conv4d
from .model import (
    CorrelationNet,
    build_hypercorrelation,
    image_to_tensor,
    mask_features,
    predict_heatmap,
)

__all__ = [
    "CenterPivotConv4d",
    "Conv4d",
    "CorrelationNet",
    "build_backbone",
    "build_hypercorrelation",
    "extract_feature_pyramid",
    "image_to_tensor",
    "load_checkpoint",
    "make_conv4d",
    "mask_features",
    "predict_heatmap",
    "save_checkpoint",
]
