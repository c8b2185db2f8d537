#!/usr/bin/env python3
"""Quadrature refinement study for the collision integral.

Evaluates Q at a handful of fixed targets on a gaussian field while
refining (a) the angular rule and (b) the u-grid stride, and emits a CSV
of values and successive differences.  Useful for picking angular_nodes
and u_integration for a production run.

Example:
    python3 scripts/convergence_study.py --n 16 --out study.csv
"""

import argparse
import csv
import sys
import time

import numpy as np

from rwboltz.collision import QuadratureSpec, ReuseGrid, SubsampledGrid, q_targets
from rwboltz.cosmology import DeSitter
from rwboltz.distribution import VGrid, gaussian_initial_data
from rwboltz.kernels import SMOOTH, KernelParams

TARGETS = np.array([
    [0.0, 0.0, 0.0],
    [0.8, 0.3, -0.5],
    [1.4, -1.0, 0.2],
])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--vmax", type=float, default=3.0)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--B", type=float, default=1.0)
    ap.add_argument("--angular", type=int, nargs="+", default=[6, 12, 24, 48])
    ap.add_argument("--strides", type=int, nargs="+", default=[4, 2, 1])
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    grid = VGrid(vmax=args.vmax, n=args.n)
    field = gaussian_initial_data(args.eps, 2.0, grid)
    cosmo = DeSitter(H=1e-9)
    kern = KernelParams(b=1.0, B=args.B, angular_mode=SMOOTH, smooth_width=0.25)

    rows = []
    prev = None
    for m in args.angular:
        quad = QuadratureSpec(m, ReuseGrid(), 0.0)
        t0 = time.perf_counter()
        q = q_targets(field, TARGETS, 0.0, cosmo, kern, quad)
        dt = time.perf_counter() - t0
        diff = np.max(np.abs(q - prev)) if prev is not None else float("nan")
        rows.append(["angular", m, *q.tolist(), diff, dt])
        prev = q
    prev = None
    for stride in args.strides:
        u_spec = ReuseGrid() if stride == 1 else SubsampledGrid(stride)
        quad = QuadratureSpec(12, u_spec, 0.0)
        t0 = time.perf_counter()
        q = q_targets(field, TARGETS, 0.0, cosmo, kern, quad)
        dt = time.perf_counter() - t0
        diff = np.max(np.abs(q - prev)) if prev is not None else float("nan")
        rows.append(["stride", stride, *q.tolist(), diff, dt])
        prev = q

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out)
        writer.writerow(["axis", "level",
                         *[f"q_target{i}" for i in range(len(TARGETS))],
                         "max_diff_prev", "seconds"])
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
            print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
