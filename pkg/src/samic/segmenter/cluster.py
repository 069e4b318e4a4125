"""k-means++ clustering of image embeddings into part-level groups."""

from __future__ import annotations

import numpy as np

from ..types import SamicError

MAX_ITERATIONS = 100


class DegenerateClusterError(SamicError, ValueError):
    pass


def cluster_embedding(embedding: np.ndarray, n: int, seed: int = 0):
    """Assign every spatial position of a (C, h, w) embedding to one of `n`
    clusters.

    Returns (cluster_map of shape (h, w), centroids of shape (n, C)).
    Seeding is k-means++; Lloyd iterations run to convergence or 100 rounds.
    """
    emb = np.asarray(embedding, dtype=np.float64)
    c, h, w = emb.shape
    points = emb.reshape(c, h * w).T
    if not 1 <= n <= points.shape[0]:
        raise ValueError(f"n must lie in [1, {points.shape[0]}]")
    if np.unique(points, axis=0).shape[0] < n:
        raise DegenerateClusterError(f"fewer than {n} distinct embedding vectors")

    rng = np.random.default_rng(seed)
    centroids = np.empty((n, c))
    centroids[0] = points[rng.integers(points.shape[0])]
    dist2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, n):
        probs = dist2 / dist2.sum() if dist2.sum() > 0 else None
        idx = rng.choice(points.shape[0], p=probs)
        centroids[i] = points[idx]
        dist2 = np.minimum(dist2, ((points - centroids[i]) ** 2).sum(axis=1))

    assignment = np.zeros(points.shape[0], dtype=np.int64)
    for _ in range(MAX_ITERATIONS):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = d2.argmin(axis=1)
        for i in range(n):
            members = points[new_assignment == i]
            if len(members):
                centroids[i] = members.mean(axis=0)
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
    return assignment.reshape(h, w), centroids
