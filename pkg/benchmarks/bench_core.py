"""Time the compiled pairwise kernels against the numpy twin.

Usage: python benchmarks/bench_core.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from gmmcramer import _core_py

try:
    from gmmcramer import _core
except ImportError:  # extension not built
    _core = None

SIZES = [(1, 3, 3), (64, 3, 3), (7, 10, 850), (64, 10, 100), (1, 200, 200)]


def _inputs(b, n1, n2, rng):
    def mix(n):
        p = rng.dirichlet(np.ones(n), size=b)
        return p, rng.normal(size=(b, n)), rng.uniform(0.0, 2.0, size=(b, n))
    return mix(n1), mix(n2)


def bench(mod, b, n1, n2, repeat, grad):
    rng = np.random.default_rng(0)
    (p1, m1, s1), (p2, m2, s2) = _inputs(b, n1, n2, rng)
    run = lambda: (mod.cross_energy(p1, m1, s1, p2, m2, s2, grad),
                   mod.self_energy(p1, m1, s1, grad))
    number = max(1, int(2e5 // (b * n1 * n2 + 1)))
    return min(timeit.repeat(run, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not available; build with pip install -e .")
        return
    print(f"{'B x n1 x n2':>16} {'grad':>5} {'numpy [us]':>12} {'cython [us]':>12} {'speedup':>8}")
    for b, n1, n2 in SIZES:
        for grad in (False, True):
            tp = bench(_core_py, b, n1, n2, args.repeat, grad)
            tc = bench(_core, b, n1, n2, args.repeat, grad)
            print(f"{f'{b}x{n1}x{n2}':>16} {str(grad):>5} {tp * 1e6:12.1f} {tc * 1e6:12.1f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
