"""Compare the compiled and pure-Python pair-accounting kernels.

    python3 benchmarks/bench_kernel.py [--repeat 5]

Times the kernel alone on a few task counts, then a full default profiling
grid (64 configurations x 10 runs) with each backend.
"""
import argparse
import timeit

import numpy as np

from shuffleload import _backend
from shuffleload.simulator import PRESETS, ClusterSpec, run_profile_grid

GRID = range(4, 33, 4)


def kernel_args(m, r, nodes=5):
    return (np.arange(m, dtype=np.int64) % nodes, np.arange(r, dtype=np.int64) % nodes,
            np.zeros(nodes, dtype=np.int64), np.full(r, 1.0 / r), 1e6, 262144.0, 1.0)


def best(stmt, repeat, number):
    return min(timeit.repeat(stmt, repeat=repeat, number=number)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    kernels = {"python": _backend.python_pair_bytes}
    if _backend.compiled_pair_bytes is not None:
        kernels["cython"] = _backend.compiled_pair_bytes
    else:
        print("compiled kernel not built; timing the Python fallback only")

    print(f"{'tasks':>10} " + " ".join(f"{name:>12}" for name in kernels) + "   speedup")
    for m, r in ((4, 4), (32, 32), (128, 128), (512, 512)):
        a = kernel_args(m, r)
        times = {name: best(lambda f=f: f(*a), args.repeat, max(1, 20000 // (m * r)))
                 for name, f in kernels.items()}
        row = " ".join(f"{t * 1e6:10.1f}us" for t in times.values())
        ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{m:>4}x{r:<5} {row}   {ratio:6.1f}x")

    cluster, workload = ClusterSpec(), PRESETS["wordcount-like"]
    print("\nfull grid, 640 simulated runs:")
    grid_times = {}
    for name, f in kernels.items():
        original = _backend.pair_bytes
        _backend.pair_bytes = f
        try:
            grid_times[name] = best(
                lambda: run_profile_grid(cluster, workload, GRID, GRID, 10, 42), args.repeat, 1)
        finally:
            _backend.pair_bytes = original
        print(f"  {name:>7}: {grid_times[name] * 1e3:8.1f} ms")
    if len(grid_times) == 2:
        print(f"  speedup: {grid_times['python'] / grid_times['cython']:.1f}x")


if __name__ == "__main__":
    main()
