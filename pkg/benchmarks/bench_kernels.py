"""Compare the numba and numpy kernel backends on identical inputs.

Run with ``python3 benchmarks/bench_kernels.py`` (``--quick`` for a short run).
Every timed call is checked for identical output across backends.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from fthresh import kernels


def random_terms(rng, k, nvars, max_exp, p):
    exps = rng.integers(0, max_exp, size=(k, nvars), dtype=np.int64)
    exps = np.unique(exps, axis=0)
    coefs = rng.integers(1, p, size=exps.shape[0], dtype=np.int64)
    return exps, coefs


def cases(quick: bool):
    rng = np.random.default_rng(2024)
    scale = 1 if quick else 4
    p = 3
    a = random_terms(rng, 200 * scale, 2, 60, p)
    b = random_terms(rng, 200 * scale, 2, 60, p)
    c = random_terms(rng, 60 * scale, 3, 20, p)
    d = random_terms(rng, 60 * scale, 3, 20, p)
    num = rng.integers(1, 10**4, size=100 * scale, dtype=np.int64)
    den = rng.integers(1, 10**4, size=100 * scale, dtype=np.int64)
    num = np.minimum(num, den)
    return [
        ("mul 2 vars, truncated q=81", lambda: kernels.mul_terms(*a, *b, p, 81)),
        ("mul 2 vars, full product", lambda: kernels.mul_terms(*a, *b, p)),
        ("mul 3 vars, truncated q=27", lambda: kernels.mul_terms(*c, *d, p, 27)),
        ("orbit batch q=2 l=1", lambda: kernels.orbit_batch(num, den, 2, 1, 1 << 24)),
    ]


def timed(fn, repeats: int):
    times, out = [], None
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(same(a, b) for a, b in zip(x, y))
    return np.array_equal(x, y)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return 1
    print(f"{'kernel':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s} {'compile ms':>11s}")
    ok = True
    for name, fn in cases(args.quick):
        with kernels.use_backend("numpy"):
            t_np, out_np = timed(fn, args.repeats)
        with kernels.use_backend("numba"):
            start = time.perf_counter()
            fn()  # first call includes JIT compilation
            compile_ms = (time.perf_counter() - start) * 1e3
            t_nb, out_nb = timed(fn, args.repeats)
        match = same(out_np, out_nb)
        ok &= match
        flag = "" if match else "  OUTPUT MISMATCH"
        print(f"{name:32s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:8.1f}x {compile_ms:11.1f}{flag}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
