"""Time the board sweep kernel: numba loop against the numpy wavefront.

    python benchmarks/bench_propagate.py [--max-nuclei 10] [--repeats 5]

Both kernels are timed in the same process regardless of the
GALTON_DNP_DISABLE_NUMBA flag; the flag only changes which one the package
dispatches to.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from galton_dnp import _kernels


def bench(size: int, repeats: int) -> dict:
    rng = np.random.default_rng(size)
    eta = rng.uniform(size=(size, size))
    rows = np.full(size, 1.0 / (2 * size))
    cols = np.zeros(size)
    kernels = {"numpy": _kernels.sweep_board_numpy}
    if _kernels.HAVE_NUMBA:
        kernels["numba"] = _kernels.sweep_board_numba
        _kernels.sweep_board_numba(eta, rows, cols)  # compile outside the timing
    results = {}
    for name, kernel in kernels.items():
        timer = timeit.Timer(lambda: kernel(eta, rows, cols))
        loops, _ = timer.autorange()
        results[name] = min(timer.repeat(repeats, loops)) / loops
    if "numba" in results:
        a = _kernels.sweep_board_numba(eta, rows, cols)
        b = _kernels.sweep_board_numpy(eta, rows, cols)
        results["max_diff"] = float(max(np.max(np.abs(a[0] - b[0])), np.max(np.abs(a[1] - b[1]))))
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--min-nuclei", type=int, default=4)
    parser.add_argument("--max-nuclei", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    print(f"dispatch backend: {_kernels.BACKEND}")
    print(f"{'N':>3} {'size':>6} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8} {'max diff':>9}")
    for n in range(args.min_nuclei, args.max_nuclei + 1):
        size = 2**n
        r = bench(size, args.repeats)
        numba_ms = r.get("numba", float("nan")) * 1e3
        print(
            f"{n:>3} {size:>6} {r['numpy'] * 1e3:>12.4f} {numba_ms:>12.4f} "
            f"{r['numpy'] / r.get('numba', float('nan')):>8.1f} {r.get('max_diff', float('nan')):>9.1e}"
        )


if __name__ == "__main__":
    main()
