"""Benchmark the shot-sampling kernel: numba @njit against the
vectorized numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_shots.py [--shots N] [--repeats R]

Both paths execute the same 64-bit counter arithmetic, so the benchmark
also asserts that their counts agree bit for bit.
"""

import argparse
import time

import numpy as np

from gupbell import kernels

CUMULATIVE = (0.42677669529663687, 0.5, 0.5732233047033631)


def time_path(fn, shots, repeats):
    best = float("inf")
    counts = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        counts = fn(shots)
        best = min(best, time.perf_counter() - t0)
    return best, counts


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shots", type=int, default=4_000_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    def numpy_path(n):
        return kernels.sample_counts_numpy(42, 0, n, *CUMULATIVE)

    rows = [("numpy", *time_path(numpy_path, args.shots, args.repeats))]

    if kernels.HAVE_NUMBA:
        def jit_path(n):
            return kernels._sample_counts_jit(
                kernels.U64(42), kernels.U64(0), n, *CUMULATIVE)

        jit_path(1000)  # compile outside the timed region
        rows.append(("numba", *time_path(jit_path, args.shots, args.repeats)))
    else:
        print("numba not installed; benchmarking the numpy path only")

    reference = rows[0][2]
    print(f"shots per call: {args.shots}, best of {args.repeats}")
    for name, seconds, counts in rows:
        rate = args.shots / seconds / 1e6
        print(f"  {name:>6}: {seconds * 1e3:8.2f} ms  {rate:8.1f} Mshots/s")
        if not np.array_equal(counts, reference):
            raise SystemExit("kernel outputs diverged; this is a bug")
    if len(rows) == 2:
        print(f"  speedup (numba / numpy): {rows[0][1] / rows[1][1]:.2f}x")


if __name__ == "__main__":
    main()
