"""Benchmark the compiled kernels against the pure-NumPy fallback.

Run:  python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from roughavg import _kernels_py

try:
    from roughavg import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def cases(quick: bool):
    rng = np.random.default_rng(0)
    n_pairs = 1024 if quick else 4096
    n_chen = 128 if quick else 256
    n_fine = (256, 16) if quick else (1024, 64)

    values = rng.standard_normal((n_pairs + 1, 32))
    lam = np.arange(1, 33, dtype=np.float64) ** 2
    yield ("reduced_pair_sup", f"(n={n_pairs}, K=32)",
           "reduced_pair_sup", (values, lam, 1.0 / n_pairs, 0.3))

    y = rng.standard_normal((n_pairs // 4 + 1, 32))
    yp = rng.standard_normal((n_pairs // 4 + 1, 2, 32))
    x = rng.standard_normal((n_pairs // 4 + 1, 2))
    yield ("controlled_remainder_sup", f"(n={n_pairs // 4}, D=2, K=32)",
           "controlled_remainder_sup", (y, yp, x, lam, 4.0 / n_pairs, 0.8))

    first = np.cumsum(rng.standard_normal((n_chen + 1, 2)), axis=0) * 0.1
    first[0] = 0.0
    second = rng.standard_normal((n_chen, 2, 2)) * 0.01
    yield ("chen_max_residual", f"(n={n_chen}, D=2)",
           "chen_max_residual", (first, second))

    da = rng.standard_normal((*n_fine, 2)) * 0.01
    yield ("second_level_sums", f"(n={n_fine[0]}, f={n_fine[1]}, D=2)",
           "second_level_sums", (da, da, True))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()

    print(f"{'kernel':<28} {'size':<24} {'numpy':>10} {'cython':>10} {'speedup':>9}")
    for label, size, name, call_args in cases(args.quick):
        t_py, r_py = timeit(getattr(_kernels_py, name), *call_args)
        if _kernels_cy is None:
            print(f"{label:<28} {size:<24} {t_py * 1e3:9.2f}ms {'n/a':>10} {'n/a':>9}")
            continue
        t_cy, r_cy = timeit(getattr(_kernels_cy, name), *call_args)
        if not np.allclose(np.asarray(r_py), np.asarray(r_cy), rtol=1e-10, atol=1e-12):
            raise AssertionError(f"backend mismatch in {name}")
        print(f"{label:<28} {size:<24} {t_py * 1e3:9.2f}ms {t_cy * 1e3:9.2f}ms "
              f"{t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
