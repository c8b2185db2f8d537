#!/usr/bin/env python3
"""Run every verification suite and write the full reports to JSON.

Thin wrapper over `rwboltz verify all` that also prints per-suite wall
times.  Exit code 0 when every suite passes, 3 otherwise.

Example:
    python3 scripts/verify_lemmas.py --json reports.json --samples 100000
"""

import argparse
import json
import sys
import time

from rwboltz.estimates import SUITES, run_suite


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=None,
                    help="sample count for the sampled suites "
                         "(default: acceptance sizes)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    all_reports = []
    violations = 0
    for suite in SUITES:
        t0 = time.perf_counter()
        reports = run_suite(suite, samples=args.samples, seed=args.seed)
        dt = time.perf_counter() - t0
        for r in reports:
            status = "pass" if r.passed else "FAIL"
            print(f"{suite:10s} {r.lemma_id:18s} {status}  "
                  f"violations={r.violations:<6d} "
                  f"max_slack={r.max_slack:+.3e}  [{dt:.2f} s]")
            violations += r.violations
            all_reports.append(r.to_dict())
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(all_reports, fh, indent=1)
        print(f"wrote {len(all_reports)} reports to {args.json}")
    return 0 if violations == 0 else 3


if __name__ == "__main__":
    sys.exit(main())
