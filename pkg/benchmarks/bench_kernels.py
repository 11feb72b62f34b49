"""Time the entropy kernels with numba and with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once per backend before timing so numba's compile
time is excluded. Also checks that both backends return the same numbers.
"""
import argparse
import math
import time

import numpy as np

from dirtygrid import kernels
from dirtygrid._accel import HAVE_NUMBA


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    sigma = 1.0
    loc = np.sort(rng.choice(400, 64, replace=False) * 1.5)
    logw = np.log(rng.dirichlet(np.ones(64)))
    y = np.linspace(loc[0] - 8, loc[-1] + 8, 40_000)
    w = rng.dirichlet(np.ones(200))
    stride = 32
    h = 1.0 / stride
    x = h * np.arange(-256, 257)
    g = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    dens = kernels.lattice_density(w, stride, g, use_numba=False)
    return {
        "mixture_logpdf (40k x 64)": lambda nb: kernels.mixture_logpdf(y, loc, logw, sigma, use_numba=nb),
        "lattice_density (200 atoms, stride 32)": lambda nb: kernels.lattice_density(w, stride, g, use_numba=nb),
        "neg_plogp_sum (%d)" % dens.size: lambda nb: kernels.neg_plogp_sum(dens, use_numba=nb),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<42}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}{'max diff':>11}")
    for name, fn in cases(rng).items():
        t_np = best_of(lambda: fn(False), args.repeat)
        if HAVE_NUMBA:
            t_nb = best_of(lambda: fn(True), args.repeat)
            diff = float(np.max(np.abs(np.asarray(fn(True)) - np.asarray(fn(False)))))
            print(f"{name:<42}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}{diff:>11.1e}")
        else:
            print(f"{name:<42}{1e3 * t_np:>12.2f}{'-':>12}{'-':>9}{'-':>11}")


if __name__ == "__main__":
    main()
