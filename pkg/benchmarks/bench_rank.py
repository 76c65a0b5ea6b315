#!/usr/bin/env python3
"""Benchmark the prime-field rank kernel: numba backend vs pure numpy.

Both paths run the same blocked delayed-reduction elimination; this script
times them on random near-square matrices and checks the ranks agree.

Usage:
    python benchmarks/bench_rank.py [--sizes 500,1000,2000] [--prime 32003]
                                    [--block 256] [--repeats 3] [--threads N]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from fatpoints import gfp


def time_backend(backend: str, mat: np.ndarray, p: int, block: int,
                 threads: int, repeats: int) -> tuple[float, int]:
    os.environ[gfp.BACKEND_ENV] = backend
    # warm the JIT outside the timed region
    gfp.rank(mat[:40, :40], p, block=block)
    best = float("inf")
    result = -1
    for _ in range(repeats):
        t0 = time.perf_counter()
        if threads > 1:
            result = gfp.rank_blocked(mat, p, threads=threads, block=block)
        else:
            result = gfp.rank(mat, p, block=block)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="500,1000,2000",
                    help="comma-separated matrix sizes n (matrices are (n+19) x n)")
    ap.add_argument("--prime", type=int, default=gfp.DEFAULT_PRIME)
    ap.add_argument("--block", type=int, default=gfp.DEFAULT_BLOCK)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",") if s]
    rng = np.random.default_rng(args.seed)
    backends = ["numpy"] + (["numba"] if gfp.HAVE_NUMBA else [])
    if len(backends) == 1:
        print("numba not importable; timing the numpy path only")

    print(f"p={args.prime} block={args.block} threads={args.threads} "
          f"repeats={args.repeats} (best-of)")
    print(f"{'n':>6} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>8}  rank")
    for n in sizes:
        mat = rng.integers(0, args.prime, (n + 19, n))
        times = {}
        ranks = {}
        for backend in backends:
            times[backend], ranks[backend] = time_backend(
                backend, mat, args.prime, args.block, args.threads, args.repeats
            )
        if len(set(ranks.values())) != 1:
            print(f"RANK DISAGREEMENT at n={n}: {ranks}")
            return 1
        t_np = times["numpy"]
        t_nb = times.get("numba")
        speed = f"{t_np / t_nb:7.2f}x" if t_nb else "     n/a"
        nb_col = f"{t_nb:12.3f}" if t_nb else "         n/a"
        print(f"{n:>6} {t_np:12.3f} {nb_col} {speed}  {ranks['numpy']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
