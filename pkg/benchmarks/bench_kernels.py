"""Compare the compiled step kernel with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 64 256 1024 4096] [--repeat 200]

Times one call of `rates` per grid size for both backends, then one full
solve with each backend selected through SODACAN_KERNEL in a subprocess.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sodacan import _fallback

try:
    from sodacan._kernels import rates as compiled_rates
except ImportError:
    compiled_rates = None

SOLVE_SNIPPET = """
import time
from sodacan import kernels
from sodacan.geometry import Params
from sodacan.solver import SolveConfig, solve
start = time.perf_counter()
solve(SolveConfig(Params(3, 3.0, 2.0, 1.0), lambda r, t: 1 - r, grid_points={grid}))
print(kernels.BACKEND, time.perf_counter() - start)
"""


def _args(m):
    r = np.linspace(0.0, 1.0, m + 1)[:-1].copy()
    u = np.cos(3 * r) + 0.1 * r ** 2
    return (u, r, 0, m, 0.0, 0.0, 1.0, float(np.cos(3.0) + 0.1), True, 3.0, 3.0, 1e-4, np.empty(m))


def bench_rates(sizes, repeat):
    print(f"{'nodes':>7} {'numpy us':>10} {'cython us':>10} {'speedup':>8}")
    for m in sizes:
        a = _args(m)
        t_np = min(timeit.repeat(lambda: _fallback.rates(*a), number=repeat, repeat=3)) / repeat
        if compiled_rates is None:
            print(f"{m:>7} {t_np * 1e6:>10.1f} {'n/a':>10}")
            continue
        t_cy = min(timeit.repeat(lambda: compiled_rates(*a), number=repeat, repeat=3)) / repeat
        print(f"{m:>7} {t_np * 1e6:>10.1f} {t_cy * 1e6:>10.1f} {t_np / t_cy:>8.1f}")


def bench_solve(grid):
    for backend in ("python", "cython"):
        env = dict(os.environ, SODACAN_KERNEL=backend)
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(grid=grid)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"full solve, grid {grid}, requested {backend}: ran {out[0]} in {float(out[1]):.2f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--grid", type=int, default=128, help="grid for the full-solve comparison")
    a = ap.parse_args()
    bench_rates(a.sizes, a.repeat)
    bench_solve(a.grid)


if __name__ == "__main__":
    main()
