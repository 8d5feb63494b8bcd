"""Compare the compiled and numpy assembly kernels on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--sizes 200,1000,5000] [--repeats 50]
"""

import argparse
import time

import numpy as np

from radelliptic._kernels import numpy_backend

try:
    from radelliptic._kernels import _speedups
except ImportError:
    _speedups = None


def make_case(n, rng):
    nodes = 1e-3 + np.sort(rng.uniform(0.0, 1.0, n + 1))
    u = rng.normal(size=n + 1)
    fvals = rng.normal(size=n + 1)
    return nodes, u, fvals


def time_backend(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200,1000,5000,20000")
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--alpha", type=float, default=1.0)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'n':>8} {'numpy [us]':>12} {'cython [us]':>12} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        nodes, u, fvals = make_case(n, rng)
        call = (nodes, u, fvals, args.alpha, 1e-6, 1.0, 1.0, 2.0, 1.0, 2,
                False)
        t_np = time_backend(numpy_backend.assemble_system, call, args.repeats)
        if _speedups is None:
            print(f"{n:>8} {t_np * 1e6:>12.1f} {'n/a':>12} {'n/a':>8}")
            continue
        ref = numpy_backend.assemble_system(*call)
        fast = _speedups.assemble_system(*call)
        for a, b in zip(ref, fast):
            assert np.allclose(a[1:-1], b[1:-1], rtol=1e-12, atol=1e-12)
        t_cy = time_backend(_speedups.assemble_system, call, args.repeats)
        print(f"{n:>8} {t_np * 1e6:>12.1f} {t_cy * 1e6:>12.1f} "
              f"{t_np / t_cy:>8.2f}")


if __name__ == "__main__":
    main()
