"""Pure-numpy fallback for the codec inner loops.

Interchangeable with the compiled backend (same labelings, Gaussian sums
equal to rounding error); ``benchmarks/bench_kernels.py`` compares the two.
"""

from collections import deque

import numpy as np


def gaussian_sum(xs, ys, height, width, sigma):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    gx = np.arange(width, dtype=np.float64)
    gy = np.arange(height, dtype=np.float64)
    dx = (gx[None, :] - xs[:, None]) / width          # (N, W)
    dy = (gy[None, :] - ys[:, None]) / height         # (N, H)
    inv = 1.0 / (2.0 * sigma * sigma)
    ex = np.exp(-(dx * dx) * inv)
    ey = np.exp(-(dy * dy) * inv)
    # exp(-(dx^2+dy^2)) separates into an outer product per prompt
    return np.einsum("kh,kw->hw", ey, ex)


_OFFSETS_4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_OFFSETS_8 = _OFFSETS_4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def label_components(binary, connectivity):
    binary = np.asarray(binary, dtype=np.uint8)
    h, w = binary.shape
    labels = np.zeros((h, w), dtype=np.int32)
    offsets = _OFFSETS_8 if connectivity == 8 else _OFFSETS_4
    count = 0
    for y in range(h):
        row = binary[y]
        for x in range(w):
            if not row[x] or labels[y, x]:
                continue
            count += 1
            queue = deque([(y, x)])
            labels[y, x] = count
            while queue:
                cy, cx = queue.popleft()
                for oy, ox in offsets:
                    ny, nx = cy + oy, cx + ox
                    if 0 <= ny < h and 0 <= nx < w and binary[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = count
                        queue.append((ny, nx))
    return labels, count
