#!/usr/bin/env python3
"""Trace the coupled-scale root branch for several low-window tuples.

For each tuple the branch starts at the decoupled end (k, l) -> (1, 1) and
is continued along a geometric gamma grid until the grid ends or the
corrector stalls at a fold.  The sweep records, per tuple, the largest gamma
with k + l > 1 and where (if anywhere) the branch was lost.

Example:
    python3 scripts/branch_sweep.py --out /tmp/branches \\
        --params 4,0.5,2,1.2 --params 4,0.5,2,1.3333333333333333
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from critcouple.algebraic import continue_branch, gamma_lower_threshold
from critcouple.errors import ConvergenceError, RegimeError
from critcouple.exponents import ParamSet

DEFAULT_TUPLES = ["4,0.5,2,1.2", "4,0.5,2,1.3333333333333333", "2,0.5,1.5,1.1"]


def parse_tuple(text: str) -> ParamSet:
    n_s, s_s, p_s, a_s = text.split(",")
    return ParamSet.from_alpha(int(n_s), float(s_s), float(p_s), float(a_s))


def sweep(params: ParamSet, gamma_max: float, points: int):
    grid = np.geomspace(1e-6, gamma_max, points)
    try:
        branch = continue_branch(params, grid)
        return branch, "completed"
    except ConvergenceError as exc:
        if exc.partial is None or not exc.partial.points:
            raise
        return exc.partial, f"stalled: {exc}"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument(
        "--params",
        action="append",
        help="N,s,p,alpha tuple (repeatable); defaults to three reference tuples",
    )
    ap.add_argument("--gamma-max", type=float, default=2.0)
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--out", type=Path, default=Path("branch_sweep_out"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, text in enumerate(args.params or DEFAULT_TUPLES):
        params = parse_tuple(text)
        try:
            threshold = gamma_lower_threshold(params)
        except RegimeError:
            threshold = float("nan")
        branch, status = sweep(params, args.gamma_max, args.points)
        last_gamma, last_k, last_l = branch.points[-1]
        rows.append(
            (
                text,
                threshold,
                branch.gamma_one,
                last_gamma,
                last_k + last_l,
                status,
            )
        )
        path = args.out / f"branch_{i}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gamma", "k", "l", "k_plus_l"])
            for g, k, l in branch.points:
                writer.writerow([repr(g), repr(k), repr(l), repr(k + l)])
        print(f"{text}: {status}")
        print(
            f"  lower threshold {threshold:.6g}, gamma_one {branch.gamma_one}, "
            f"last point gamma={last_gamma:.6g} k+l={last_k + last_l:.6g} -> {path}"
        )

    summary = args.out / "summary.csv"
    with open(summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["params", "lower_threshold", "gamma_one", "last_gamma", "last_sum", "status"]
        )
        writer.writerows(rows)
    print(f"wrote {summary}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
