#!/usr/bin/env python3
"""Run the small-data decay scenario and print a one-line verdict.

Writes the usual run artifacts (manifest, snapshots, diagnostics, log)
to --out, then summarizes whether the weighted norm stayed within the
small-data envelope and by how much the decay certificate moved.

Example:
    python3 scripts/run_small_data.py --out runs/smalldata --n 16 --eps 1e-3
"""

import argparse
import sys
import tempfile

from rwboltz.cli import main as cli_main
from rwboltz.config import build_sim_config, parse_pairs, serialize_sim_config


def make_config(args) -> str:
    pairs = parse_pairs(f"""
cosmology.family = EdS
cosmology.c = 1.0
kernel.b = 1.0
kernel.B = 1.0
grid.vmax = {args.vmax}
grid.n = {args.n}
quad.angular_nodes = {args.angular_nodes}
quad.u_integration = subsample:{args.stride}
quad.tail_rtol = 1e-8
solver.t_end = {args.t_end}
solver.dt = {args.dt}
solver.snapshot_every = {args.snapshot_every}
initial.kind = gaussian
initial.eps = {args.eps}
initial.width = 2.0
""")
    return serialize_sim_config(build_sim_config(pairs))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--vmax", type=float, default=4.0)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--t-end", type=float, default=10.0)
    ap.add_argument("--angular-nodes", type=int, default=6)
    ap.add_argument("--stride", type=int, default=4)
    ap.add_argument("--snapshot-every", type=int, default=10)
    args = ap.parse_args(argv)

    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(make_config(args))
        cfg_path = fh.name
    code = cli_main(["run", cfg_path, "--out", args.out])
    if code != 0:
        print(f"run failed with exit code {code}", file=sys.stderr)
        return code

    import json
    import os
    with open(os.path.join(args.out, "diagnostics.json")) as fh:
        diag = json.load(fh)
    norm0 = diag[0]["grid_norm"]
    running = diag[-1]["running_norm"]
    cert0 = diag[0]["decay_certificate"]
    cert_max = max(r["decay_certificate"] for r in diag)
    clamped = diag[-1]["clamped_mass"]
    ok = running <= 2.0 * norm0 and cert_max <= 2.0 * cert0
    print(f"{'PASS' if ok else 'FAIL'}: running norm {running / norm0:.3f}x "
          f"initial, decay certificate max {cert_max / cert0:.3f}x initial, "
          f"clamped mass {clamped:.3e}")
    return 0 if ok else 3


if __name__ == "__main__":
    sys.exit(main())
