"""Compare the compiled regret-matching kernel against the numpy fallback.

    python3 benchmarks/bench_rm.py --sizes 10 100 --seeds 200 --iters 256
"""
import argparse
import time

import numpy as np

from eqsearch import _rm_py, regret
from eqsearch.games.matrix import random_zero_sum_game


def bench(impl, A, uniforms, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = impl.rm_matrix2_batch(A, -A, uniforms, True, True, np.zeros(0, dtype=np.int64))
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 100])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--iters", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if regret._kernel is None:
        print("compiled kernel not built; only the numpy fallback is available")
    print(f"{'size':>6} {'seeds':>6} {'iters':>6} {'numpy s':>10} {'cython s':>10} {'speedup':>8} {'max diff':>10}")
    for n in args.sizes:
        A = random_zero_sum_game(n, n, 0).payoffs[..., 0].copy()
        uniforms = np.random.default_rng(0).random((args.seeds, args.iters, 2))
        t_py, out_py = bench(_rm_py, A, uniforms, args.repeat)
        if regret._kernel is None:
            print(f"{n:6d} {args.seeds:6d} {args.iters:6d} {t_py:10.4f} {'-':>10} {'-':>8} {'-':>10}")
            continue
        t_cy, out_cy = bench(regret._kernel, A, uniforms, args.repeat)
        diff = max(float(np.max(np.abs(a - b))) for key in ("regrets", "weights")
                   for a, b in zip(out_py[key], out_cy[key]))
        print(f"{n:6d} {args.seeds:6d} {args.iters:6d} {t_py:10.4f} {t_cy:10.4f} {t_py / t_cy:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
