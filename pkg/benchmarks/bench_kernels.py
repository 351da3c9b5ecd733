"""Benchmark the compiled metric kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [--sizes 8 64 512] [--repeat 20]

The compiled kernels win on small grids (per-call overhead, which dominates
the exhaustive oracle suites); numpy's vectorized ops win on large grids.
"""

import argparse
import importlib
import time

import numpy as np


def load_backends():
    backends = {}
    try:
        backends["cython"] = importlib.import_module("avszero.metrics._kernels")
    except ImportError:
        pass
    backends["python"] = importlib.import_module("avszero.metrics._kernels_py")
    return backends


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 64, 512])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    backends = load_backends()
    rng = np.random.default_rng(0)
    for size in args.sizes:
        pred = (rng.random((size, size)) > 0.5).astype(np.uint8)
        gt = (rng.random((size, size)) > 0.5).astype(np.uint8)
        flat = rng.random(size * size).astype(np.float32)
        k = max(1, flat.size // 3)
        # Small grids: many calls per measurement so per-call overhead shows.
        inner = max(1, 10000 // size)

        results = {}
        for name, mod in backends.items():
            t_overlap = bench(lambda m=mod: [m.overlap_counts(pred, gt) for _ in range(inner)],
                              args.repeat) / inner
            t_topk = bench(lambda m=mod: [m.topk_select(flat, k) for _ in range(inner)],
                           args.repeat) / inner
            results[name] = (t_overlap, t_topk)
            print(f"{size:4d}x{size:<4d} {name:>7}: overlap_counts {t_overlap * 1e6:9.2f} us   "
                  f"topk_select {t_topk * 1e6:9.2f} us")
            assert mod.overlap_counts(pred, gt) == backends["python"].overlap_counts(pred, gt)
            assert (mod.topk_select(flat, k) == backends["python"].topk_select(flat, k)).all()

        if "cython" in results:
            co, ct = results["cython"]
            po, pt = results["python"]
            print(f"          speedup cython/python: overlap {po / co:.2f}x, topk {pt / ct:.2f}x")
    print("backends agree bit-exactly")


if __name__ == "__main__":
    main()
