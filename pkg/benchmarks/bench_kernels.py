#!/usr/bin/env python3
"""Time the hot kernels: numba loop vs numpy vectorized vs the prefix-sum plan.

Usage: python benchmarks/bench_kernels.py [--points 2048] [--shifts 4096] [--k 4] [--d 3] [--repeat 5]

Prints one table row per kernel with the median time and the max deviation
from the numpy reference. The numba rows are skipped under HDSFT_NO_NUMBA=1.
"""
import argparse
import time

import numpy as np

from hdsft import kernels
from hdsft._accel import USE_NUMBA


def timeit(fn, repeat):
    fn()  # warm-up, includes numba compilation
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times)), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2048)
    ap.add_argument("--shifts", type=int, default=4096)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    T, F = 64.0, 256.0
    freqs = rng.uniform(-8, 8, size=(args.k, args.d))
    amps = np.exp(2j * np.pi * rng.uniform(size=args.k))
    xs = rng.uniform(-T / 2, T / 2, size=(args.points, args.d))
    h = rng.integers(0, T * F, size=args.d).astype(np.float64)
    shifts = rng.integers(-T * F / 2, T * F / 2, size=args.shifts) / F
    weights = rng.normal(size=args.shifts) + 1j * rng.normal(size=args.shifts)
    rate = 3.25

    rows = []
    t_ref, ref = timeit(lambda: kernels.tone_sum_numpy(freqs, amps, xs), args.repeat)
    rows.append(("tone_sum", "numpy", t_ref, 0.0))
    if USE_NUMBA:
        t, out = timeit(lambda: kernels.tone_sum_numba(freqs, amps, xs), args.repeat)
        rows.append(("tone_sum", "numba", t, np.abs(out - ref).max()))

    call = (freqs, amps, xs, h, rate, T, shifts, weights)
    t_ref, ref = timeit(lambda: kernels.hashed_conv_numpy(*call), args.repeat)
    rows.append(("hashed_conv", "numpy", t_ref, 0.0))
    if USE_NUMBA:
        t, out = timeit(lambda: kernels.hashed_conv_numba(*call), args.repeat)
        rows.append(("hashed_conv", "numba", t, np.abs(out - ref).max()))
    plan = kernels.ShiftSumPlan(freqs, amps, h, rate, T, shifts, weights)
    t, out = timeit(lambda: plan(xs), args.repeat)
    rows.append(("hashed_conv", "prefix-sum plan", t, np.abs(out - ref).max()))

    print(f"k={args.k} d={args.d} points={args.points} shifts={args.shifts} numba={'on' if USE_NUMBA else 'off'}")
    print(f"{'kernel':<12} {'variant':<16} {'median ms':>10} {'speedup':>8} {'max dev':>10}")
    base = {name: t for name, variant, t, _ in rows if variant == "numpy"}
    for name, variant, t, dev in rows:
        print(f"{name:<12} {variant:<16} {t * 1e3:>10.2f} {base[name] / t:>8.1f} {dev:>10.2e}")


if __name__ == "__main__":
    main()
