#!/usr/bin/env python3
"""How shallow can the interior minimum of the coupling ratio get?

For tuples with beta > p > alpha the ratio h dips below 1 at a finite
tau_min, but the depth 1 - h(tau_min) collapses toward zero as alpha
approaches p while tau_min runs off to infinity.  This scan samples that
approach on a fixed (N, s, p) base and tabulates (p - alpha, tau_min,
depth), which is why sign checks on h(tau_min) - 1 must not assume any
fixed margin.

Example:
    python3 scripts/dip_depth_scan.py --base 1,0.5,1.5 --steps 12
"""

from __future__ import annotations

import argparse
import csv
import warnings
from pathlib import Path

import numpy as np

from critcouple.coupling import RootCountWarning, classify
from critcouple.exponents import ParamSet


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", default="1,0.5,1.5", help="N,s,p")
    ap.add_argument("--steps", type=int, default=12)
    ap.add_argument("--gap-max", type=float, default=0.4, help="largest p - alpha")
    ap.add_argument("--gap-min", type=float, default=1e-3, help="smallest p - alpha")
    ap.add_argument("--out", type=Path, default=None, help="optional CSV path")
    args = ap.parse_args()

    n_s, s_s, p_s = args.base.split(",")
    N, s, p = int(n_s), float(s_s), float(p_s)

    rows = []
    for gap in np.geomspace(args.gap_max, args.gap_min, args.steps):
        params = ParamSet.from_alpha(N, s, p, p - gap)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RootCountWarning)
            cls = classify(params)
        if caught:
            # tau_min has run past the scan ceiling; the dip depth is below
            # what double precision can register, so h collapses onto 1
            print(f"p-alpha={gap:.3e}  unresolved (root beyond the scan window)")
            rows.append((gap, params.alpha, float("nan"), float("nan")))
            continue
        depth = 1.0 - cls.h_at_tau_min
        rows.append((gap, params.alpha, cls.tau_min, depth))
        print(
            f"p-alpha={gap:.3e}  tau_min={cls.tau_min:.6e}  "
            f"1-h(tau_min)={depth:.6e}"
        )

    if args.out is not None:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p_minus_alpha", "alpha", "tau_min", "depth"])
            writer.writerows(rows)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
