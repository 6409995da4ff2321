"""Time the hot kernels on both backends: numba-jitted vs pure numpy.

Run from the repository root:

    python3 benchmarks/bench_kernels.py            # default sizes
    python3 benchmarks/bench_kernels.py --scale 4  # 4x the work

Each kernel is timed on the same inputs via its private ``_*_py`` and
``_*_jit`` entry points, after a warm-up call so JIT compilation never
counts. If numba is unavailable only the numpy column is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from evtab import kernels


def _time(fn, reps: int) -> float:
    """Best-of-three wall time for `reps` calls, in milliseconds per call."""
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best / reps * 1e3


def bench_five_number(rng, scale: int):
    small = [rng.uniform(0, 1e6, size=30) for _ in range(2000 * scale)]
    large = [rng.uniform(0, 1e6, size=100_000) for _ in range(10 * scale)]

    def run(fn, arrays):
        def body():
            for a in arrays:
                fn(a)
        return body

    for label, arrays in (("five_number n=30 x%d" % len(small), small),
                          ("five_number n=100k x%d" % len(large), large)):
        yield label, run(kernels._five_number_py, arrays), (
            run(kernels._five_number_jit, arrays) if kernels._HAVE_NUMBA else None
        ), len(arrays)


def bench_bin_counts(rng, scale: int):
    values = rng.uniform(-50, 150, size=1_000_000 * scale)
    edges = np.linspace(0.0, 100.0, 41)
    reps = 20

    def run(fn):
        def body():
            for _ in range(reps):
                fn(values, edges)
        return body

    yield "bin_counts n=%dk bins=40 x%d" % (values.size // 1000, reps), run(
        kernels._bin_counts_py
    ), (run(kernels._bin_counts_jit) if kernels._HAVE_NUMBA else None), reps


def bench_match(rng, scale: int):
    for n, reps in ((5_000, 2000 * scale), (200_000 * scale, 50)):
        eligible = rng.random(n) > 0.2
        exact_codes = np.ascontiguousarray(rng.integers(0, 12, size=(2, n)), dtype=np.int64)
        tol_values = np.ascontiguousarray(rng.uniform(0, 2000, size=(1, n)))
        ts_by = rng.integers(1_600_000_000_000, 1_700_000_000_000, size=n).astype(np.int64)
        ts_by[rng.random(n) < 0.1] = kernels.MISSING_TS
        id_rank = np.arange(n, dtype=np.int64)
        q_exact = np.array([3, 7], dtype=np.int64)
        q_tol = np.array([1000.0])
        tol_eps = np.array([50.0])

        def run(fn, k, args=(eligible, exact_codes, q_exact, tol_values, q_tol,
                             tol_eps, ts_by, id_rank), reps=reps):
            def body():
                for _ in range(reps):
                    fn(*args, k, 17)
            return body

        for label, k in (("match n=%dk keep-all x%d" % (n // 1000, reps), -1),
                         ("match n=%dk recency k=60 x%d" % (n // 1000, reps), 60)):
            yield label, run(kernels._match_py, k), (
                run(kernels._match_jit, k) if kernels._HAVE_NUMBA else None
            ), reps


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=int, default=1, help="multiply the workload")
    args = parser.parse_args()

    rng = np.random.default_rng(42)
    cases = []
    for gen in (bench_five_number, bench_bin_counts, bench_match):
        cases.extend(gen(rng, args.scale))

    print(f"kernel backend available: numba={kernels._HAVE_NUMBA}, "
          f"active={kernels.backend_name()}\n")
    header = f"{'case':<38} {'numpy ms/op':>12} {'numba ms/op':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, py_body, jit_body, reps in cases:
        if jit_body is not None:
            jit_body()  # warm-up: trigger JIT compilation outside the timing
        py_ms = _time(py_body, reps)
        if jit_body is None:
            print(f"{label:<38} {py_ms:>12.4f} {'-':>12} {'-':>8}")
        else:
            jit_ms = _time(jit_body, reps)
            print(f"{label:<38} {py_ms:>12.4f} {jit_ms:>12.4f} {py_ms / jit_ms:>7.1f}x")


if __name__ == "__main__":
    main()
