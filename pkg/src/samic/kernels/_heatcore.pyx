# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the heatmap codec.

Mirrors the reference implementations in ``_heatcore_py``; the two backends
are interchangeable (identical labelings, float64 agreement on the Gaussian
accumulation to normal rounding error).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def gaussian_sum(double[:] xs, double[:] ys, int height, int width, double sigma):
    """Sum of prompt-centered Gaussians evaluated at integer pixel centers."""
    cdef int n = xs.shape[0]
    cdef int x, y, k
    cdef double dx, dy, acc
    cdef double inv = 1.0 / (2.0 * sigma * sigma)
    cdef double w = <double> width
    cdef double h = <double> height
    out = np.zeros((height, width), dtype=np.float64)
    cdef double[:, :] o = out
    for y in range(height):
        for x in range(width):
            acc = 0.0
            for k in range(n):
                dx = (x - xs[k]) / w
                dy = (y - ys[k]) / h
                acc += exp(-(dx * dx + dy * dy) * inv)
            o[y, x] = acc
    return out


def label_components(cnp.uint8_t[:, :] binary, int connectivity):
    """Two-pass union-find labeling.

    Returns (labels, count); labels are 1..count assigned in row-major order
    of each component's first (topmost-leftmost) pixel, 0 for background.
    """
    cdef int h = binary.shape[0]
    cdef int w = binary.shape[1]
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, :] labels = labels_arr
    parent_arr = np.zeros(h * w // 2 + 2, dtype=np.int32)
    cdef int[:] parent = parent_arr
    cdef int next_label = 1
    cdef int y, x, i, a, b, root
    cdef int neigh[4]
    cdef int nn

    for y in range(h):
        for x in range(w):
            if binary[y, x] == 0:
                continue
            nn = 0
            if x > 0 and binary[y, x - 1]:
                neigh[nn] = labels[y, x - 1]; nn += 1
            if y > 0:
                if binary[y - 1, x]:
                    neigh[nn] = labels[y - 1, x]; nn += 1
                if connectivity == 8:
                    if x > 0 and binary[y - 1, x - 1]:
                        neigh[nn] = labels[y - 1, x - 1]; nn += 1
                    if x < w - 1 and binary[y - 1, x + 1]:
                        neigh[nn] = labels[y - 1, x + 1]; nn += 1
            if nn == 0:
                parent[next_label] = next_label
                labels[y, x] = next_label
                next_label += 1
            else:
                a = neigh[0]
                while parent[a] != a:
                    a = parent[a]
                for i in range(1, nn):
                    b = neigh[i]
                    while parent[b] != b:
                        b = parent[b]
                    if b < a:
                        parent[a] = b
                        a = b
                    elif b > a:
                        parent[b] = a
                labels[y, x] = a

    # Resolve and renumber by first appearance in scan order.
    remap_arr = np.zeros(next_label, dtype=np.int32)
    cdef int[:] remap = remap_arr
    cdef int count = 0
    for y in range(h):
        for x in range(w):
            a = labels[y, x]
            if a == 0:
                continue
            root = a
            while parent[root] != root:
                root = parent[root]
            if remap[root] == 0:
                count += 1
                remap[root] = count
            labels[y, x] = remap[root]
    return labels_arr, count
