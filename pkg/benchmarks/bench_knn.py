"""Benchmark: compiled k-d tree kernel vs the pure-Python twin.

Times tree construction plus a full leave-one-out k-th-neighbor pass, the
dominant cost of the divergence estimator. Run:

    python3 benchmarks/bench_knn.py [--sizes 1000,4000,8000] [--d 1,3,8] [-k 1]
"""

import argparse
import time

import numpy as np

from knndiv.knn import HAVE_COMPILED_KERNEL, loo_radii


def bench_once(n, d, k, method, repeats=3, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    loo_radii(x, k, method=method)  # warm-up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        loo_radii(x, k, method=method)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,4000,8000")
    parser.add_argument("--d", default="1,3,8")
    parser.add_argument("-k", type=int, default=1)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    dims = [int(s) for s in args.d.split(",")]

    methods = ["python"] + (["compiled"] if HAVE_COMPILED_KERNEL else [])
    if not HAVE_COMPILED_KERNEL:
        print("compiled kernel unavailable; timing pure Python only")
    print(f"{'n':>6} {'d':>3} " + " ".join(f"{m:>12}" for m in methods)
          + ("   speedup" if len(methods) == 2 else ""))
    for n in sizes:
        for d in dims:
            times = [bench_once(n, d, args.k, m) for m in methods]
            row = f"{n:>6} {d:>3} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in times)
            if len(times) == 2 and times[1] > 0:
                row += f"   {times[0] / times[1]:>6.1f}x"
            print(row)


if __name__ == "__main__":
    main()
