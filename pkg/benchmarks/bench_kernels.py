#!/usr/bin/env python3
"""Compiled vs pure-Python kernel timings.

Runs every kernel on a representative workload under both backends,
checks that the outputs agree bit-for-bit, and prints the speedup.  An
end-to-end laminate construction is timed as well, since that path mixes
scalar kernel calls with tree building in Python.

    python3 benchmarks/bench_kernels.py --size 200000 --repeats 5
"""

import argparse
import math
import sys
import time

import numpy as np

from isohull import KSet, Mat2, decompose, verify
from isohull import _backend
from isohull.approx import matrix_from_sv


def best_of(fn, repeats):
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def build_workloads(size, seed):
    rng = np.random.default_rng(seed)
    k = KSet(((1.0, 4.0), (2.0, 3.0), (0.5, 5.0)))
    th, va = k.envelope.arrays
    entries = rng.normal(size=(size, 4)) * 2.0
    l2 = rng.uniform(0.0, 1.2 * k.b_max, size)
    l1 = rng.uniform(0.0, 1.0, size) * l2
    xs = rng.uniform(0.0, 2.0 * k.b_max, size)
    scalar_rows = entries[:2000]
    pairs = list(zip(l1[:2000].tolist(), l2[:2000].tolist()))

    def bench(kernels):
        return [
            ("sv2 (2k scalar calls)",
             lambda: [kernels.sv2(*row) for row in scalar_rows]),
            ("sv2_batch",
             lambda: kernels.sv2_batch(entries)),
            ("min_margin (2k scalar calls)",
             lambda: [kernels.min_margin(a, b, th, va) for a, b in pairs]),
            ("margin_batch",
             lambda: kernels.margin_batch(l1, l2, th, va)),
            ("sigma_batch",
             lambda: kernels.sigma_batch(xs, th, va)),
            ("h_theta_batch",
             lambda: kernels.h_theta_batch(entries, 1.0)),
            ("bisect_margin_e11 (2k calls)",
             lambda: [kernels.bisect_margin_e11(0.1, 2.0, 0.0, 6.0, th, va,
                                                1e-12, 200)
                      for _ in range(2000)]),
        ]

    return bench


def bench_decompose(n, seed):
    rng = np.random.default_rng(seed)
    k = KSet(((1.0, 4.0), (2.0, 3.0)))
    th, va = k.envelope.arrays
    mats = []
    while len(mats) < n:
        l2 = rng.uniform(0.0, k.b_max)
        l1 = rng.uniform(0.0, l2)
        m, _ = _backend.min_margin(l1, l2, th, va)
        if m < 1e-6:
            continue
        mats.append(matrix_from_sv(l1, l2, *rng.uniform(0.0, 2.0 * math.pi, 2)))

    def run():
        for xi in mats:
            if not verify(decompose(xi, k), xi, k).ok:
                raise RuntimeError("verification failed during benchmark")

    return run


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=200_000,
                        help="batch workload size (default 200000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best-of (default 5)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not _backend.HAVE_COMPILED:
        print("compiled kernels are not available; nothing to compare",
              file=sys.stderr)
        return 1

    pk = _backend.get_backend("python")
    ck = _backend.get_backend("compiled")
    bench = build_workloads(args.size, args.seed)

    print(f"workload size {args.size}, best of {args.repeats}\n")
    print(f"{'kernel':<30} {'python':>10} {'compiled':>10} "
          f"{'speedup':>8}  agree")
    print("-" * 68)
    mismatches = 0
    for (name, py_fn), (_, c_fn) in zip(bench(pk), bench(ck)):
        t_py, r_py = best_of(py_fn, args.repeats)
        t_c, r_c = best_of(c_fn, args.repeats)
        ok = agree(r_py, r_c)
        mismatches += not ok
        print(f"{name:<30} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms "
              f"{t_py / t_c:>7.1f}x  {'yes' if ok else 'NO'}")

    n_lam = 200
    run = bench_decompose(n_lam, args.seed)
    times = {}
    for backend in ("python", "compiled"):
        _backend.use_backend(backend)
        times[backend], _ = best_of(run, args.repeats)
    _backend.use_backend("compiled")
    print("-" * 68)
    print(f"{f'decompose+verify ({n_lam} mats)':<30} "
          f"{times['python'] * 1e3:>8.2f}ms {times['compiled'] * 1e3:>8.2f}ms "
          f"{times['python'] / times['compiled']:>7.1f}x  yes")

    if mismatches:
        print(f"\n{mismatches} kernel(s) disagreed between backends",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
