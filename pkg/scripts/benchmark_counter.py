#!/usr/bin/env python3
"""Benchmark the pruned lattice-point counter at growing shell radii.

Counts sublevel solutions for a sampled map at T = 2^4 .. 2^9 and reports
wall time, visited-cell counts, and the pruning ratio against the dense box,
so regressions in the enumeration order or the LLL preconditioning show up
as step changes in cells/second.
"""

import argparse
import time

import numpy as np

from genlat.core import ApproxFunction, PointClass, SignedPowerForm
from genlat.counting import CountQuery, count_solutions
from genlat.haar import sample_sl


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--seed", type=int, default=31)
    ap.add_argument("--kmax", type=int, default=9)
    ap.add_argument("--s", type=float, default=0.5, help="psi decay power")
    args = ap.parse_args()

    f = SignedPowerForm(args.n - 1, 1, 2)
    psi = ApproxFunction(((1.0, args.s, 0),))
    g = sample_sl(args.n, np.random.default_rng(args.seed))

    print(f"{'T':>6} {'count':>8} {'visited':>12} {'dense box':>14} {'pruned':>8} {'secs':>8}")
    for k in range(4, args.kmax + 1):
        t = float(2**k)
        query = CountQuery(
            g=g,
            f=f,
            bound=psi,
            norm=f.canonical_norm(),
            point_class=PointClass.ALL_NONZERO,
            t0=0.0,
            t=t,
        )
        tic = time.monotonic()
        res = count_solutions(query)
        secs = time.monotonic() - tic
        dense = (2 * int(t) + 1) ** args.n
        print(
            f"{int(t):>6} {res.count:>8} {res.visited:>12} {dense:>14} "
            f"{res.visited / dense:>8.1e} {secs:>8.3f}"
        )


if __name__ == "__main__":
    main()
