"""Timings for the hot kernels: compiled core vs numpy/scipy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Walk-step cases cover the shapes the estimators actually produce (point-mass
batches early in a propagation, mixed batches later, exhaustive-start
batches); cut-scan cases cover the exhaustive conductance sizes.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from emwalk import kernels
from emwalk.graphs import sample_er
from emwalk.walks import WalkKind, transition_weights


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_walk_step(repeat: int) -> list[tuple[str, float, float]]:
    rows = []
    cases = [
        ("point starts  n=512 d~20  k=64", 512, 0.04, 64, True),
        ("mixed batch   n=512 d~20  k=64", 512, 0.04, 64, False),
        ("mixed batch   n=256 dense k=256", 256, 0.17, 256, False),
        ("single dist   n=2000 d~8  k=1", 2000, 0.004, 1, False),
    ]
    for label, n, p, k, point in cases:
        g = sample_er(n, p, 1)
        indptr, indices = g.csr()
        w_self, w_move = transition_weights(g, WalkKind.LAZY)
        rng = np.random.default_rng(0)
        if point:
            M = np.zeros((k, n))
            M[np.arange(k), rng.integers(0, n, k)] = 1.0
        else:
            M = rng.random((k, n))
            M /= M.sum(axis=1, keepdims=True)
        times = {}
        for backend in ("python", "compiled"):
            if backend == "compiled" and not kernels.compiled_available():
                times[backend] = float("nan")
                continue
            steps = 20

            def run():
                X = M
                for _ in range(steps):
                    X = kernels.walk_step_batch(X, indptr, indices, w_self,
                                                w_move, force=backend)

            times[backend] = _time(run, repeat) / steps
        rows.append((f"walk_step {label}", times["python"], times["compiled"]))
    return rows


def bench_cut_scan(repeat: int) -> list[tuple[str, float, float]]:
    rows = []
    for n in (12, 16, 18):
        g = sample_er(n, 0.5, 2)
        us, vs = g.endpoints
        times = {}
        for backend in ("python", "compiled"):
            if backend == "compiled" and not kernels.compiled_available():
                times[backend] = float("nan")
                continue
            times[backend] = _time(
                lambda: kernels.min_cut_scan(n, g.degrees, us, vs, force=backend),
                repeat)
        rows.append((f"cut_scan n={n} (2^{n} subsets)", times["python"], times["compiled"]))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"active backend: {kernels.backend()}"
          f" (compiled available: {kernels.compiled_available()})")
    rows = bench_walk_step(args.repeat) + bench_cut_scan(args.repeat)
    width = max(len(r[0]) for r in rows)
    print(f"\n{'case':<{width}}  {'python':>12}  {'compiled':>12}  {'speedup':>8}")
    for label, t_py, t_c in rows:
        if np.isnan(t_c):
            print(f"{label:<{width}}  {t_py * 1e3:>10.3f}ms  {'n/a':>12}  {'n/a':>8}")
        else:
            print(f"{label:<{width}}  {t_py * 1e3:>10.3f}ms  {t_c * 1e3:>10.3f}ms"
                  f"  {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
