"""Timing comparison of the numpy and numba kernel implementations.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Numba variants are skipped (with a note) when numba is unavailable or
when FINSPECT_NUMBA=0 disables them for the process.
"""

import argparse
import timeit

import numpy as np

from finspect import _kernels as k


def best_ms(fn, number, repeat):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number * 1e3


def bench_median(rng):
    side = 5
    img = rng.random((256, 256))
    pad = side // 2
    padded = np.pad(img, pad, mode="edge")
    return ("median filter 256x256 side 5",
            lambda: k.median_filter_np(padded, side),
            (lambda: k.median_filter_nb(padded, side)) if k.median_filter_nb else None)


def bench_polar(rng):
    img = rng.random((256, 256))
    radii = np.linspace(0.0, 120.0, 64)
    thetas = np.linspace(0.0, 2 * np.pi, 128, endpoint=False)
    return ("polar resample 64x128 of 256x256",
            lambda: k.polar_resample_np(img, 128.0, 128.0, radii, thetas),
            (lambda: k.polar_resample_nb(img, 128.0, 128.0, radii, thetas))
            if k.polar_resample_nb else None)


def bench_sweep(rng):
    n, dim, classes = 200, 8, 4
    pts = rng.normal(size=(n, dim))
    gram = pts @ pts.T
    labels = rng.integers(0, classes, n)
    targets = np.zeros((n, classes))
    targets[np.arange(n), labels] = 1.0
    eta0 = np.zeros((n, classes))

    def run_np():
        eta = eta0.copy()
        k.svm_sweep_np(gram, eta, targets, 1.0)

    def run_nb():
        eta = eta0.copy()
        k.svm_sweep_nb(gram, eta, targets, 1.0)

    return ("svm sweep n=200 k=4",
            run_np, run_nb if k.svm_sweep_nb else None)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--number", type=int, default=5,
                        help="calls per timing sample (default 5)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing samples per kernel (default 3)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = [bench_median(rng), bench_polar(rng), bench_sweep(rng)]

    if not k.HAS_NUMBA:
        print("numba path disabled (not installed, or FINSPECT_NUMBA=0); "
              "timing numpy fallbacks only\n")

    header = f"{'kernel':<36} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, fn_np, fn_nb in cases:
        t_np = best_ms(fn_np, args.number, args.repeat)
        if fn_nb is None:
            print(f"{name:<36} {t_np:>10.3f} {'-':>10} {'-':>8}")
            continue
        fn_nb()  # trigger the jit compile outside the timed region
        t_nb = best_ms(fn_nb, args.number, args.repeat)
        print(f"{name:<36} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
