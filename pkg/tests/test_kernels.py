"""Oracle and agreement tests for the heatmap kernels.

The reference implementations here are written independently of the package
kernels: the Gaussian oracle evaluates the formula pixel by pixel, and the
labeling oracle is a set-based flood fill.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from samic import kernels


def gaussian_oracle(xs, ys, height, width, sigma):
    out = np.zeros((height, width))
    for y in range(height):
        for x in range(width):
            total = 0.0
            for px, py in zip(xs, ys):
                dx = (x - px) / width
                dy = (y - py) / height
                total += math.exp(-(dx * dx + dy * dy) / (2 * sigma * sigma))
            out[y, x] = total
    return out


def label_oracle(binary, connectivity):
    """Set-based flood fill; labels ordered by first scan-order pixel."""
    h, w = binary.shape
    if connectivity == 8:
        offs = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        offs = [(-1, 0), (0, -1), (0, 1), (1, 0)]
    labels = np.zeros((h, w), dtype=np.int64)
    count = 0
    for sy in range(h):
        for sx in range(w):
            if not binary[sy, sx] or labels[sy, sx]:
                continue
            count += 1
            frontier = {(sy, sx)}
            while frontier:
                cy, cx = frontier.pop()
                labels[cy, cx] = count
                for dy, dx in offs:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and binary[ny, nx] \
                            and not labels[ny, nx]:
                        frontier.add((ny, nx))
    return labels, count


@pytest.fixture(params=kernels.AVAILABLE_BACKENDS)
def backend(request):
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend("auto")


def test_gaussian_matches_oracle(backend, rng):
    for _ in range(5):
        n = int(rng.integers(1, 5))
        xs = rng.uniform(0, 20, n)
        ys = rng.uniform(0, 16, n)
        got = kernels.gaussian_sum(xs, ys, 16, 20, 0.05)
        want = gaussian_oracle(xs, ys, 16, 20, 0.05)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("connectivity", [4, 8])
def test_labeling_matches_oracle(backend, connectivity, rng):
    for _ in range(10):
        h, w = int(rng.integers(1, 24)), int(rng.integers(1, 24))
        grid = (rng.random((h, w)) > 0.55).astype(np.uint8)
        got_labels, got_n = kernels.label_components(grid, connectivity)
        want_labels, want_n = label_oracle(grid.astype(bool), connectivity)
        assert got_n == want_n
        np.testing.assert_array_equal(np.asarray(got_labels), want_labels)


def test_backends_agree(rng):
    xs, ys = rng.uniform(0, 64, 6), rng.uniform(0, 64, 6)
    grid = (rng.random((40, 40)) > 0.5).astype(np.uint8)
    results = {}
    for name in kernels.AVAILABLE_BACKENDS:
        kernels.set_backend(name)
        g = kernels.gaussian_sum(xs, ys, 64, 64, 0.02)
        lab, n = kernels.label_components(grid, 8)
        results[name] = (np.asarray(g), np.asarray(lab), n)
    kernels.set_backend("auto")
    names = list(results)
    if len(names) < 2:
        pytest.skip("only one kernel backend available")
    a, b = results[names[0]], results[names[1]]
    np.testing.assert_allclose(a[0], b[0], rtol=1e-13, atol=1e-15)
    np.testing.assert_array_equal(a[1], b[1])
    assert a[2] == b[2]


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("gpu")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_labeling_partition_property(seed):
    """Labels partition the foreground: background 0, components contiguous."""
    g = np.random.default_rng(seed)
    grid = (g.random((12, 12)) > 0.5).astype(np.uint8)
    labels, n = kernels.label_components(grid, 8)
    labels = np.asarray(labels)
    assert set(np.unique(labels)) <= set(range(n + 1))
    np.testing.assert_array_equal(labels > 0, grid.astype(bool))
    if n:
        assert set(np.unique(labels[labels > 0])) == set(range(1, n + 1))
