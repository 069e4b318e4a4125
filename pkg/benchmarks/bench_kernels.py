"""Benchmark the compiled heatmap kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--size 224] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from samic import kernels


def bench(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=224)
    parser.add_argument("--points", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    xs = rng.uniform(0, args.size, args.points)
    ys = rng.uniform(0, args.size, args.points)
    grid = (rng.random((args.size, args.size)) > 0.6)

    rows = []
    for backend in kernels.AVAILABLE_BACKENDS:
        kernels.set_backend(backend)
        t_gauss = bench(lambda: kernels.gaussian_sum(
            xs, ys, args.size, args.size, 0.02), args.repeats)
        t_label = bench(lambda: kernels.label_components(grid, 8), args.repeats)
        rows.append((backend, t_gauss, t_label))
    kernels.set_backend("auto")

    print(f"{'backend':<12}{'gaussian_sum':>14}{'label_components':>18}")
    for backend, tg, tl in rows:
        print(f"{backend:<12}{tg * 1e3:>12.2f}ms{tl * 1e3:>16.2f}ms")
    if len(rows) == 2:
        print(f"{'speedup':<12}{rows[1][1] / rows[0][1]:>13.1f}x"
              f"{rows[1][2] / rows[0][2]:>17.1f}x")


if __name__ == "__main__":
    main()
