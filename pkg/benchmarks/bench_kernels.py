"""Compare the numba and pure-numpy summation kernels.

Run:  python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are called directly, so one process times both.  The numba
kernels are compiled before timing.  Results from the two backends are
also compared, since both use compensated summation in the same order.
"""
import argparse
import time

import numpy as np

from skspline import _accel
from skspline.fundamental import FundamentalSpline
from skspline.kernels import GaussianKernel
from skspline.lattice import enumerate_box, new_lattice


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    hexa = new_lattice([[1.0, 0.5], [0.0, np.sqrt(3.0) / 2.0]])
    fs = FundamentalSpline.build(hexa, GaussianKernel(np.eye(2)), 64)
    x = rng.uniform(-3, 3, (2000, 2))
    yield ("gauss_shift_sum n=2 spline eval", "gauss",
           (x, fs._shifts, fs._weights, fs.kernel.spatial_metric))
    lat = new_lattice([[1.0]])
    x1 = rng.uniform(-4, 4, (20000, 1))
    fs1 = FundamentalSpline.build(lat, GaussianKernel([[1.0]]), 64)
    yield ("gauss_shift_sum n=1 spline eval", "gauss",
           (x1, fs1._shifts, fs1._weights, fs1.kernel.spatial_metric))
    pts = enumerate_box(hexa, 12).indices @ hexa.generator.T
    z = rng.uniform(-3, 3, (1024, 2))
    w = np.exp(-np.sum(pts * pts, axis=1))
    yield ("phase_sum n=2 spatial symbol", "phase", (z, pts, w, np.zeros_like(w)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'case':36s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for title, kind, argv in cases():
        np_fn = _accel.gauss_shift_sum_numpy if kind == "gauss" else _accel.phase_sum_numpy
        t_np = best_of(lambda: np_fn(*argv), args.repeat)
        ref = np_fn(*argv)
        if _accel.HAVE_NUMBA:
            nb_fn = _accel.gauss_shift_sum_numba if kind == "gauss" else _accel.phase_sum_numba
            out = nb_fn(*argv)
            t_nb = best_of(lambda: nb_fn(*argv), args.repeat)
            diff = float(np.max(np.abs(np.asarray(out) - np.asarray(ref))))
            print(f"{title:36s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.2f} {diff:10.2e}")
        else:
            print(f"{title:36s} {t_np:10.4f} {'-':>10s} {'-':>8s} {'-':>10s}")


if __name__ == "__main__":
    main()
