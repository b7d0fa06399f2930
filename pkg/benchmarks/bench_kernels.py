"""Benchmark the numba kernel path against the numpy fallback.

Runs the tridiagonal hot-path kernels (Thomas elimination, nonlinearity
evaluation, and the fused damped-Newton loop) on identical problems and
reports wall-clock times for both implementations.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--exponents 10 13 16]

When numba is unavailable or disabled via RMLAB_NO_NUMBA=1, the "numba"
column times the undecorated pure-Python loops, which is reported so the
comparison is not mistaken for a JIT measurement.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from reduced_measures import _kernels
from reduced_measures.grids import build_grid, negative_laplacian
from reduced_measures.measures import DiscreteMeasure
from reduced_measures.nonlinearities import make_exponential
from reduced_measures.solver import assemble_rhs


def _best_of(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _problem(h_exponent: int):
    grid = build_grid("radialN", 2.0**-h_exponent, dim=2, radius=1.0)
    op = negative_laplacian(grid)
    g = make_exponential().truncate(64.0)
    mu = DiscreteMeasure.from_atoms(grid, [(0.0, 8.0 * math.pi)])
    b = assemble_rhs(grid, mu)
    u0 = op.solve(b)
    descriptor = g.descriptor()
    tol = 1e-9 * max(1.0, float(np.sum(np.abs(b) * grid.cell_volumes)))
    return grid, op, descriptor, b, u0, tol


def bench(h_exponent: int, repeats: int) -> list[tuple[str, float, float]]:
    grid, op, desc, b, u0, tol = _problem(h_exponent)
    kind, p, lo, hi, arg_hi = desc
    vols = grid.cell_volumes
    out = np.empty(grid.n_nodes)
    rows = []

    def time_pair(label, fn_numba, fn_numpy):
        fn_numba()  # warm-up (JIT compilation on the numba path)
        fn_numpy()
        rows.append(
            (label, _best_of(fn_numba, repeats), _best_of(fn_numpy, repeats))
        )

    time_pair(
        f"g_eval        n=2^{h_exponent}",
        lambda: _kernels.g_eval_numba(kind, p, lo, hi, arg_hi, u0, out),
        lambda: _kernels.g_eval_numpy(kind, p, lo, hi, arg_hi, u0, out),
    )
    time_pair(
        f"thomas_solve  n=2^{h_exponent}",
        lambda: _kernels.thomas_solve_numba(op.dl, op.d, op.du, b),
        lambda: _kernels.thomas_solve_numpy(op.dl, op.d, op.du, b),
    )
    args = (op.dl, op.d, op.du, vols, b, kind, p, lo, hi, arg_hi, u0, tol, 80, 30)
    time_pair(
        f"newton loop   n=2^{h_exponent}",
        lambda: _kernels.newton_tridiag_numba(*args),
        lambda: _kernels.newton_tridiag_numpy(*args),
    )

    numba_u = _kernels.newton_tridiag_numba(*args)[0]
    numpy_u = _kernels.newton_tridiag_numpy(*args)[0]
    gap = float(np.max(np.abs(numba_u - numpy_u)))
    rows.append((f"  max |u_numba - u_numpy| = {gap:.3e}", None, None))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument(
        "--exponents", type=int, nargs="+", default=[10, 13, 16],
        help="mesh exponents k; each problem has 2^k cells",
    )
    args = parser.parse_args()

    jit = "numba JIT" if _kernels.HAS_NUMBA else "pure-Python loops (no numba!)"
    print(f"kernel path A: {jit}")
    print("kernel path B: numpy / scipy.linalg.solve_banded")
    print(f"{'case':<28}{'A (s)':>12}{'B (s)':>12}{'B/A':>8}")
    for exponent in args.exponents:
        for label, t_numba, t_numpy in bench(exponent, args.repeats):
            if t_numba is None:
                print(label)
            else:
                ratio = t_numpy / t_numba if t_numba > 0 else math.inf
                print(f"{label:<28}{t_numba:>12.6f}{t_numpy:>12.6f}{ratio:>8.2f}")


if __name__ == "__main__":
    main()
