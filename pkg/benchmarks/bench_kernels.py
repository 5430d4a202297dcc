"""Compare the compiled and numpy kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the two hot loops in isolation and three end-to-end calls that use them.
"""

import argparse
import time
from fractions import Fraction as F

import numpy as np

from hgsoliton import kernels
from hgsoliton.dhm import coordinate_pushforwards
from hgsoliton.geom import build_polytope, lattice_points
from hgsoliton.invariants import hg_grad_hess, s_finite_level
from hgsoliton.solver import minimize_hg
from hgsoliton.weights import EXP, derivative, make_exp_mix

CUBE = build_polytope([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)])
BLP3 = build_polytope([[-1, -1, -1], [3, -1, -1], [-1, 3, -1], [-1, -1, 1], [1, -1, 1], [-1, 1, 1]])
MIX = make_exp_mix([(1, 1), (2, F(1, 2))])


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    n = 20000
    coef = np.ascontiguousarray(rng.normal(size=(n, 4)))
    s0 = np.zeros(n)
    s1 = np.ones(n)
    t0 = rng.normal(size=n)
    h = rng.uniform(0.1, 1, n)
    c, a = np.array([1.0, 2.0]), np.array([1.0, 0.5])
    x = rng.uniform(-2, 2, 2_000_000)
    y = rng.uniform(-2, 2, 2_000_000)
    gp = derivative(MIX)
    # warm the exact pushforward cache so end-to-end rows time the float work
    coordinate_pushforwards(BLP3, (F(1, 3), F(-1, 2), F(1)), 2)
    lattice_points(CUBE, 60)
    return {
        "panels_exp (20k panels)": lambda: kernels.panels_exp(coef, s0, s1, t0, h, c, a, -1.0, 0.0),
        "lattice_exp_sums (2M pts)": lambda: kernels.lattice_exp_sums(x, y, c, a),
        "s_finite_level cube m=60": lambda: s_finite_level(CUBE, gp, (1, 0, 0), (0, 1, 0), 60),
        "hg_grad_hess blp3 (cached)": lambda: hg_grad_hess(BLP3, MIX, (F(1, 3), F(-1, 2), F(1))),
        "minimize_hg blp3 (warm cache)": lambda: minimize_hg(BLP3, MIX),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if "compiled" not in kernels.BACKENDS:
        raise SystemExit("compiled backend not built; run pip install -e . first")
    table = cases()
    print(f"{'case':32s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in table.items():
        res = {}
        for be in ("python", "compiled"):
            with kernels.use_backend(be):
                fn()
                res[be] = best_of(fn, args.repeat)
        print(f"{name:32s} {1e3 * res['python']:12.2f} {1e3 * res['compiled']:14.2f} {res['python'] / res['compiled']:8.2f}")
    t0 = time.perf_counter()
    from hgsoliton.dhm import _pushforwards

    _pushforwards.cache_clear()
    coordinate_pushforwards(BLP3, (F(2, 7), F(-1, 3), F(5, 4)), 2)
    print(f"\nexact rational pushforward (blp3, order 2, uncached): {1e3 * (time.perf_counter() - t0):.1f} ms (backend independent)")


if __name__ == "__main__":
    main()
