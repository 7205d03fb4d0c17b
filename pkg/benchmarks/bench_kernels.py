"""Time the compiled and numpy pairwise kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--sizes 100 300 1000] [--dim 2] [--repeats 5]
"""

import argparse
import timeit

import numpy as np

from mied import _kernels_py
from mied.mollifiers import FAMILY_CODES

try:
    from mied import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def bench(fn, args, repeats):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeats)) * 1e3


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 1000])
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'N':>6} {'family':>9} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'max rel diff':>13}")
    for N in args.sizes:
        X = rng.normal(size=(N, args.dim))
        lp = rng.normal(size=N)
        glp = rng.normal(size=(N, args.dim))
        dsq = (_kernels_py.nn_dists(X) / 1.5) ** 2
        for fam, code in FAMILY_CODES.items():
            call = (X, lp, glp, code, args.dim + 1e-4, 1e-2, dsq)
            t_py = bench(_kernels_py.log_sum_and_grad, call, args.repeats)
            if _ckernels is None:
                print(f"{N:>6} {fam:>9} {t_py:>10.2f} {'n/a':>10}")
                continue
            t_c = bench(_ckernels.log_sum_and_grad, call, args.repeats)
            g_py = _kernels_py.log_sum_and_grad(*call)[1]
            g_c = _ckernels.log_sum_and_grad(*call)[1]
            diff = float(np.max(np.abs(g_c - g_py)) / np.max(np.abs(g_py)))
            print(f"{N:>6} {fam:>9} {t_py:>10.2f} {t_c:>10.2f} {t_py / t_c:>7.1f}x {diff:>13.1e}")


if __name__ == "__main__":
    main()
