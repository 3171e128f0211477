"""Compare the compiled window scan with the NumPy fallback.

    python3 benchmarks/bench_scan.py [--sizes 1024 4096 16384] [--repeat 3]

Prints one line per (N, i): best-of-repeat time for each backend over all
dyadic window lengths, the speedup, and the max relative disagreement.
"""

import argparse
import time

import numpy as np

from lpsmooth import _scan_py
from lpsmooth.campanato import dyadic_lengths

try:
    from lpsmooth import _scan
except ImportError:
    _scan = None


def full_scan(kernel, rows, i):
    out = []
    for L in dyadic_lengths(rows.shape[1]):
        if L <= i:
            continue
        out.append(kernel(rows, L, _scan_py.window_gram_factor(L, i)))
    return out


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1024, 4096, 16384])
    ap.add_argument("--degrees", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--rows", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _scan is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
    rng = np.random.default_rng(0)
    print(f"{'N':>7} {'i':>2} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8} {'max rel diff':>13}")
    for N in args.sizes:
        rows = rng.standard_normal((args.rows, N)) + 1j * rng.standard_normal((args.rows, N))
        for i in args.degrees:
            t_py, ref = best_time(lambda: full_scan(_scan_py.window_residuals, rows, i), args.repeat)
            if _scan is None:
                print(f"{N:>7} {i:>2} {t_py:>11.4f} {'-':>13} {'-':>8} {'-':>13}")
                continue
            t_c, got = best_time(lambda: full_scan(_scan.window_residuals, rows, i), args.repeat)
            diff = max(float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
                       for a, b in zip(ref, got))
            print(f"{N:>7} {i:>2} {t_py:>11.4f} {t_c:>13.4f} {t_py / t_c:>8.1f} {diff:>13.2e}")


if __name__ == "__main__":
    main()
