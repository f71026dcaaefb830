#!/usr/bin/env python3
"""Lattice refinement study for the scalar quotient minimum.

Runs the ground-state minimization on a doubling sequence of grid sizes,
warm-starting each level from the previous minimizer embedded into the finer
grid, and tabulates value, iteration count, and Euler-Lagrange residual per
level.  The quotient should drift down (or hold) as the lattice refines.

Example:
    python3 scripts/refinement_study.py --params 1,0.25,1.8,1.5 --levels 4
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from critcouple.exponents import ParamSet
from critcouple.gagliardo import (
    DiscreteFunction,
    Grid1D,
    MinimizeOptions,
    gaussian_bump,
    minimize_scalar,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--params", default="1,0.25,1.8,1.5", help="N,s,p,alpha (N=1)")
    ap.add_argument("--n0", type=int, default=32, help="coarsest grid size")
    ap.add_argument("--levels", type=int, default=3, help="number of doublings + 1")
    ap.add_argument("--half-width", type=float, default=20.0)
    ap.add_argument("--max-iter", type=int, default=30_000)
    ap.add_argument("--out", type=Path, default=None, help="optional CSV path")
    args = ap.parse_args()

    n_s, s_s, p_s, a_s = args.params.split(",")
    params = ParamSet.from_alpha(int(n_s), float(s_s), float(p_s), float(a_s))
    # tol = 0 exhausts the line search instead of stopping at shallow spots
    opts = MinimizeOptions(tol=0.0, max_iter=args.max_iter, symmetrize=True)

    rows = []
    init = None
    prev_value = None
    n = args.n0
    for level in range(args.levels):
        grid = Grid1D(args.half_width, n)
        if init is None:
            start = gaussian_bump(grid)
        else:
            start = DiscreteFunction(grid, np.repeat(init.values, 2))
        result = minimize_scalar(start, params, opts)
        change = "" if prev_value is None else f"{result.value / prev_value - 1.0:+.3e}"
        rows.append((n, result.value, result.iterations, result.el_residual, change))
        print(
            f"n={n:5d}  value={result.value:.10f}  iters={result.iterations:6d}  "
            f"el_residual={result.el_residual:.3e}  rel_change={change or 'n/a'}"
        )
        init = result.minimizer
        prev_value = result.value
        n *= 2

    if args.out is not None:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "value", "iterations", "el_residual", "rel_change"])
            writer.writerows(rows)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
