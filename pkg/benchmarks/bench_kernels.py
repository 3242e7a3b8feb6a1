"""Benchmark the compiled kernel core against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the two hot kernels (bank cross-correlation, channel statistics) and
the end-to-end per-image feature path at a few representative sizes.
"""

import argparse
import time

import numpy as np

from domgen.kernels import fallback
from domgen.style import build_filter_bank

try:
    from domgen.kernels import _core as compiled
except ImportError:
    compiled = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_conv(backend, img, kernels, stride, repeats):
    return best_of(lambda: backend.conv2d_bank(img, kernels, stride), repeats)


def bench_stats(backend, fm, repeats):
    return best_of(lambda: backend.channel_stats(fm, 1e-5), repeats)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    if compiled is None:
        print("compiled core not built; run `python setup.py build_ext --inplace`")
        return

    rng = np.random.default_rng(0)
    print(f"{'kernel':<34} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for h, cout in ((32, 8), (64, 16), (128, 64)):
        img = np.ascontiguousarray(rng.uniform(0, 1, (3, h, h)))
        bank = build_filter_bank(3, cout, 3, seed=7)
        t_np = bench_conv(fallback, img, bank.kernels, 2, args.repeats)
        t_cy = bench_conv(compiled, img, bank.kernels, 2, args.repeats)
        a = fallback.conv2d_bank(img, bank.kernels, 2)
        b = compiled.conv2d_bank(img, bank.kernels, 2)
        assert np.allclose(a, b, atol=1e-10), "backends disagree"
        name = f"conv2d_bank 3x{h}x{h} -> {cout}ch"
        print(f"{name:<34} {t_np * 1e6:>8.1f}us {t_cy * 1e6:>8.1f}us {t_np / t_cy:>7.1f}x")

    for c, h in ((8, 15), (64, 31), (64, 63)):
        fm = rng.normal(0, 1, (c, h, h))
        t_np = bench_stats(fallback, fm, args.repeats)
        t_cy = bench_stats(compiled, fm, args.repeats)
        name = f"channel_stats {c}x{h}x{h}"
        print(f"{name:<34} {t_np * 1e6:>8.1f}us {t_cy * 1e6:>8.1f}us {t_np / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
