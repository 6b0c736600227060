"""Time the compiled kernels against the pure-Python reference.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from doslb import instances
from doslb._backend import BACKENDS
from doslb.environment import Feedback
from doslb.estimation import Geometry, GramState, RadiusParams, region
from doslb.tolerances import TOL


def random_lps(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        d = int(rng.integers(2, 6))
        m = int(rng.integers(d + 1, 9))
        A = rng.normal(size=(m, d))
        b = rng.uniform(0.5, 2.0, size=m)
        box = np.vstack([np.eye(d), -np.eye(d)])
        out.append((rng.normal(size=d), np.vstack([A, box]), np.concatenate([b, np.full(2 * d, 3.0)])))
    return out


def enumeration_case():
    inst = instances.running_example()
    view = inst.public_view()
    g = GramState.fresh(2, 16.0, inst.K, inst.U)
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.uniform(-1, 3, size=2)
        g = g.update(x, Feedback(float(inst.theta_star @ x), inst.A @ x))
    p = RadiusParams(0.01, inst.U, 1.005)
    R = region(g, "reward", Geometry.BOX_L1, p).vertices()
    W = np.stack([region(g, u, Geometry.BOX_L1, p).vertices() for u in range(inst.U)])
    return R, W, view


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--lps", type=int, default=500)
    args = ap.parse_args()
    lps = random_lps(args.lps)
    R, W, view = enumeration_case()
    M = np.random.default_rng(2).normal(size=(8, 8))
    M = M + M.T
    tol = (TOL.lp_feasibility, TOL.lp_pivot, TOL.lp_optimality)
    rows = []
    for name, k in BACKENDS.items():
        def run_lps():
            for c, A, b in lps:
                k.simplex(c, np.zeros((0, c.size)), np.zeros(0), A, b, *tol)

        def run_enum():
            for _ in range(100):
                k.doslb_enumerate(R, W, view.known_lhs, view.known_rhs, view.unknown_levels, *tol)

        def run_eig():
            for _ in range(100):
                k.jacobi_eigh(M, TOL.jacobi)

        rows.append((name, bench(run_lps, args.repeat) / len(lps), bench(run_enum, args.repeat) / 100,
                     bench(run_eig, args.repeat) / 100))
    print(f"{'backend':8s} {'simplex/LP':>14s} {'enumerate/round':>16s} {'jacobi 8x8':>12s}")
    for name, a, b, c in rows:
        print(f"{name:8s} {a * 1e6:12.1f}us {b * 1e6:14.1f}us {c * 1e6:10.1f}us")
    if len(rows) == 2:
        (_, a0, b0, c0), (_, a1, b1, c1) = rows
        print(f"speedup  {a0 / a1:13.1f}x {b0 / b1:15.1f}x {c0 / c1:11.1f}x")
    else:
        print("compiled backend not built; only the reference kernels were timed")


if __name__ == "__main__":
    main()
