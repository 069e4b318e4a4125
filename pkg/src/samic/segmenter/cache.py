"""Content-addressed, on-disk cache for image embeddings.

Entries are raw little-endian float32 files named by content hash, each with
a JSON sidecar recording shape, producer id, and hash. Insertion publishes
atomically (write to a temp file, then rename), so concurrent readers never
observe a torn entry.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .base import SegmenterBackend

CACHE_DIR_ENV = "SAMIC_CACHE_DIR"


def content_hash(image: np.ndarray, producer_id: str) -> str:
    h = hashlib.sha256()
    arr = np.ascontiguousarray(image)
    h.update(producer_id.encode())
    h.update(str(arr.shape).encode())
    h.update(str(arr.dtype).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


class EmbeddingCache:
    def __init__(self, directory: str | Path | None = None):
        directory = directory or os.environ.get(CACHE_DIR_ENV) or ".samic-cache"
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _paths(self, key: str) -> tuple[Path, Path]:
        return self.directory / f"{key}.f32", self.directory / f"{key}.json"

    def get(self, key: str) -> np.ndarray | None:
        data_path, meta_path = self._paths(key)
        if not (data_path.exists() and meta_path.exists()):
            return None
        meta = json.loads(meta_path.read_text())
        flat = np.fromfile(data_path, dtype="<f4")
        return flat.reshape(meta["shape"])

    def put(self, key: str, embedding: np.ndarray, producer_id: str) -> None:
        data_path, meta_path = self._paths(key)
        payload = np.ascontiguousarray(embedding, dtype="<f4")
        meta = {"shape": list(payload.shape), "producer": producer_id, "hash": key}
        for path, blob in ((data_path, payload.tobytes()),
                           (meta_path, json.dumps(meta).encode())):
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)


def embed_image(image: np.ndarray, backend: SegmenterBackend,
                cache: EmbeddingCache) -> np.ndarray:
    """Compute-or-fetch an embedding; byte-identical warm or cold."""
    key = content_hash(image, backend.producer_id)
    cached = cache.get(key)
    if cached is not None:
        cache.hits += 1
        return cached
    cache.misses += 1
    embedding = np.asarray(backend.embed(image), dtype=np.float32)
    cache.put(key, embedding, backend.producer_id)
    return embedding
