"""Compare the numba and pure-numpy implementation of every hot kernel.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called once
before timing so numba's compilation cost stays out of the numbers. The last
section times a whole rewire + encode pass in two subprocesses, one with
``HOPWIRE_DISABLE_NUMBA=1``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hopwire.generate import gen_erdos
from hopwire.kernels import IMPLEMENTATIONS
from hopwire.linalg import JACOBI_MAX_SWEEPS, JACOBI_TOL


def _inputs(name, n, rng):
    g = gen_erdos(n, min(1.0, 4.0 / n), int(rng.integers(1 << 30)))
    adj = g.adjacency()
    if name == "bfs_rows":
        return (adj, np.arange(n, dtype=np.int64), n)
    if name == "matmul_checked":
        a = adj.astype(np.int64)
        return (a, a)
    if name == "jacobi_sweeps":
        m = rng.normal(size=(n, n))
        return (0.5 * (m + m.T), JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if name == "scatter_add_rows":
        return (rng.integers(0, n, size=20 * n).astype(np.int64), rng.normal(size=(20 * n, 32)), n)
    raise KeyError(name)


def _best_of(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


PIPELINE = """
import time
from hopwire import encode, rewire
from hopwire.generate import gen_erdos
graphs = [gen_erdos(40, 0.08, s) for s in range(30)]
encode(rewire(graphs[0], 2), "adj")
t = time.perf_counter()
for g in graphs:
    encode(rewire(g, 3), "adj")
    encode(rewire(g, 1), "lp", q=8)
print(time.perf_counter() - t)
"""


def _pipeline_seconds(disable):
    env = dict(os.environ, HOPWIRE_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="32,128,256", help="comma-separated node counts")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-pipeline", action="store_true")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'n':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, (fast, slow) in IMPLEMENTATIONS.items():
        for n in sizes:
            inputs = _inputs(name, n, rng)
            t_fast = _best_of(fast, inputs, args.repeat)
            t_slow = _best_of(slow, inputs, args.repeat)
            print(f"{name:<18}{n:>6}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}")

    if not args.skip_pipeline:
        on, off = _pipeline_seconds(False), _pipeline_seconds(True)
        print(f"\nrewire+encode on 30 graphs: numba {on:.3f} s, numpy {off:.3f} s")


if __name__ == "__main__":
    main()
