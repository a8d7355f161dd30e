"""Numba vs NumPy timings for the three hot kernels.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

The first numba call (JIT compile, or cache load) is reported
separately and excluded from the steady-state numbers.
"""

import argparse
import time

import numpy as np

from tdoa_bifurcation import _kernels, build_quintic, make_config
from tdoa_bifurcation.localize import DEGENERATE_TOL, DOUBLE_ROOT_TOL, RESIDUAL_TOL
from tdoa_bifurcation.tdoa import tau2_forward_array


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="points per kernel call")
    ap.add_argument("--starts", type=int, default=256, help="Newton starts")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cfg = make_config((0, 0), (2, 0), (2, 2))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-6, 6, size=(args.n, 2))
    x, y = np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1])
    ii, jj, cc = build_quintic(cfg).normalized._term_arrays()
    taus = np.ascontiguousarray(tau2_forward_array(cfg, pts))
    tau = taus[0]
    starts = cfg.points.mean(axis=0) + rng.uniform(-10, 10, size=(args.starts, 2))
    m = cfg.points

    cases = {
        "poly_eval": (
            lambda: _kernels.poly_eval_numpy(ii, jj, cc, x, y),
            lambda: _kernels.poly_eval_numba(ii, jj, cc, x, y),
        ),
        "localize_batch": (
            lambda: _kernels.localize_batch_numpy(m, taus, DEGENERATE_TOL, DOUBLE_ROOT_TOL, RESIDUAL_TOL),
            lambda: _kernels.localize_batch_numba(m, taus, DEGENERATE_TOL, DOUBLE_ROOT_TOL, RESIDUAL_TOL),
        ),
        "newton_batch": (
            lambda: _kernels.newton_batch_numpy(m, tau, starts, 200, 1e-10),
            lambda: _kernels.newton_batch_numba(m, tau, starts, 200, 1e-10),
        ),
    }

    print(f"n = {args.n}, Newton starts = {args.starts}, best of {args.repeat}")
    print(f"{'kernel':<16}{'first numba':>14}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, (np_fn, nb_fn) in cases.items():
        t0 = time.perf_counter()
        nb_fn()
        first = time.perf_counter() - t0
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{name:<16}{first:>13.3f}s{t_np:>11.4f}s{t_nb:>11.4f}s{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
