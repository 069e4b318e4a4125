from .app import create_app
from .service import (
    AlreadyCommittedError,
    AnnotationError,
    AnnotationRecord,
    AnnotationService,
    AnnotationSession,
    EmbeddingNotReadyError,
    EmptyDraftError,
    OutOfBoundsError,
    UnknownImageError,
    UnknownSessionError,
    load_record,
    replay_records,
)

__all__ = [
    "AlreadyCommittedError",
    "AnnotationError",
    "AnnotationRecord",
    "AnnotationService",
    "AnnotationSession",
    "EmbeddingNotReadyError",
    "EmptyDraftError",
    "OutOfBoundsError",
    "UnknownImageError",
    "UnknownSessionError",
    "create_app",
    "load_record",
    "replay_records",
]
