"""Time the numba and pure-numpy variants of each hot kernel.

Run with ``python3 benchmarks/bench_kernels.py``.  Numba variants are called
once before timing so compilation is excluded.
"""
import argparse
import timeit

import numpy as np

from softcov.kernels import BACKENDS


def cases(rng):
    W = rng.dirichlet(np.ones(3), size=2)
    n = 10
    counts = rng.integers(0, 4, size=(16, 2**n)).astype(float)
    cw = rng.integers(0, 2, size=(300, n))
    P = rng.dirichlet(np.ones(3**n), size=16)
    q = rng.dirichlet(np.ones(3**n))
    ld = np.log(W / (0.5 * W.sum(axis=0)))
    y = rng.integers(0, 3, size=n)
    v = np.sort(np.round(rng.normal(size=200_000), 3))
    p = rng.random(v.size)
    return {
        "contract_rows": (counts, W, n),
        "accumulate_codewords": (cw, W),
        "kl_tv_rows": (P, q, np.log(q)),
        "density_sums": (rng.integers(0, 2, size=(100_000, n)), y, ld),
        "coalesce_sorted": (v, p, 1e-12),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    args_by_kernel = cases(np.random.default_rng(0))
    print(f"{'kernel':<22}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, a in args_by_kernel.items():
        f_np, f_nb = BACKENDS["numpy"][name], BACKENDS["numba"][name]
        f_nb(*a)  # compile
        t_np = min(timeit.repeat(lambda: f_np(*a), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*a), number=1, repeat=args.repeat))
        print(f"{name:<22}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
