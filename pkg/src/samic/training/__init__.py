from .episodes import (
    Episode,
    build_episode,
    episode_tensors,
    prompts_to_heatmap,
    sample_episode,
    scale_point,
    subsample_training_set,
    video_pairs,
)
from .evaluate import KShotReport, evaluate_kshot, model_predictor, oracle_predictor
from .trainer import DivergenceError, TrainResult, apply_determinism, train

__all__ = [
    "DivergenceError",
    "Episode",
    "KShotReport",
    "TrainResult",
    "apply_determinism",
    "build_episode",
    "episode_tensors",
    "evaluate_kshot",
    "model_predictor",
    "oracle_predictor",
    "prompts_to_heatmap",
    "sample_episode",
    "scale_point",
    "subsample_training_set",
    "train",
    "video_pairs",
]
