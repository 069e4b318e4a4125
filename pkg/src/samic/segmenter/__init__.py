from .base import BackendUnavailableError, SegmenterBackend, segment_instances
from .cache import CACHE_DIR_ENV, EmbeddingCache, content_hash, embed_image
from .cluster import DegenerateClusterError, cluster_embedding
from .mock import MockSegmenter
from .registry import get_backend

__all__ = [
    "BackendUnavailableError",
    "CACHE_DIR_ENV",
    "DegenerateClusterError",
    "EmbeddingCache",
    "MockSegmenter",
    "SegmenterBackend",
    "cluster_embedding",
    "content_hash",
    "embed_image",
    "get_backend",
    "segment_instances",
]
