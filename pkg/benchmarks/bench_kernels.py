"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--sizes 10000,1000000] [--repeat 5]

Both backends are imported under explicit names, so the env flag does not
matter here. Compilation time is reported separately from steady-state
timings.
"""

import argparse
import timeit

import numpy as np

from klbound import _kernels


def _best(func, repeat):
    return min(timeit.repeat(func, number=1, repeat=repeat))


def bench(sizes, repeat, seed=0):
    rng = np.random.default_rng(seed)

    start = timeit.default_timer()
    _kernels.welford_numba(np.arange(3.0))
    _kernels.kl_bound_batch_numba(0.0, 1.0, 1.0, 2.0)
    compile_s = timeit.default_timer() - start
    print(f"numba first-call (compile or cache load): {compile_s:.3f}s\n")

    # welford: max relative diff; bound: max absolute diff (the bound is a
    # difference of two O(1) terms, so tiny values carry ~1e-15 absolute noise)
    print(f"{'kernel':<16}{'n':>10}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}{'max diff':>12}")
    for n in sizes:
        x = rng.standard_normal(n) * 3.0 + 1.0
        a = _kernels.welford_numba(x)
        b = _kernels.welford_numpy(x)
        diff = max(abs(u - v) / max(abs(v), 1e-300) for u, v in zip(a[1:], b[1:]) if v)
        t_nb = _best(lambda: _kernels.welford_numba(x), repeat)
        t_np = _best(lambda: _kernels.welford_numpy(x), repeat)
        print(f"{'welford':<16}{n:>10}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>10.2f}{diff:>12.1e}")

        ep = rng.uniform(-5, 5, n)
        eq = ep + rng.uniform(0, 10, n)
        vp, vq = 10 ** rng.uniform(-3, 3, (2, n))
        u = _kernels.kl_bound_batch_numba(ep, eq, vp, vq)
        v = _kernels.kl_bound_batch_numpy(ep, eq, vp, vq)
        diff = float(np.max(np.abs(u - v)))
        t_nb = _best(lambda: _kernels.kl_bound_batch_numba(ep, eq, vp, vq), repeat)
        t_np = _best(lambda: _kernels.kl_bound_batch_numpy(ep, eq, vp, vq), repeat)
        print(f"{'kl_bound_batch':<16}{n:>10}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>10.2f}{diff:>12.1e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10000,1000000,10000000")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench([int(s) for s in args.sizes.split(",")], args.repeat)


if __name__ == "__main__":
    main()
