"""Batch front end.

Subcommands:

  run <config> --out <dir>     integrate a configured simulation
  verify <suite> [--samples N] [--seed S] [--B x ...]
                               run verification suites, print a table
  kinematics --v x,y,z --u x,y,z --omega x,y,z --R r [--rep R|RS] [--B b]
                               one-shot collision record as JSON
  integrability --family F --b B [--c c] [--q q] [--H h]
                               scale-factor forcing integrability verdict

Exit codes: 0 success, 1 usage/config error, 2 numerical blow-up,
3 verification violations.

A run writes, under --out: manifest.json (before integration starts;
only its end timestamp is filled in afterwards), snapshots/NNNN.csv,
diagnostics.json and run.log.  RWB_THREADS caps the worker count used by
the collision quadrature and the verification suites.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .cosmology import DeSitter, EinsteinDeSitter, PowerLaw, integrability
from .kinematics import (
    OMEGA_R,
    OMEGA_RS,
    KinematicsError,
    collision_scalars,
    cutoff_quantity,
    energy_defect,
    post_collision_omega_R,
    post_collision_omega_RS,
)

log = logging.getLogger("rwboltz")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BLOWUP = 2
EXIT_VIOLATIONS = 3


def _apply_thread_cap():
    raw = os.environ.get("RWB_THREADS")
    if not raw:
        return
    try:
        want = max(1, int(raw))
    except ValueError:
        return
    try:
        import numba

        numba.set_num_threads(min(want, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def cmd_run(args) -> int:
    from .config import ConfigError, load_sim_config, serialize_sim_config
    from .solver import BlowUpError, run, write_outputs

    try:
        config = load_sim_config(args.config)
    except (ConfigError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    handler = logging.FileHandler(os.path.join(outdir, "run.log"))
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    manifest_path = os.path.join(outdir, "manifest.json")
    manifest = {
        "config_snapshot": serialize_sim_config(config),
        "config_path": os.path.abspath(args.config),
        "seed_registry": {},
        "tool_version": __version__,
        "start_timestamp": _utcnow(),
        "end_timestamp": None,
        "output_paths": {
            "snapshots": "snapshots",
            "diagnostics": "diagnostics.json",
            "log": "run.log",
        },
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    try:
        result = run(config)
        write_outputs(result, outdir)
        code = EXIT_OK
    except BlowUpError as err:
        if err.partial is not None:
            write_outputs(err.partial, outdir)
            log.info("partial outputs written")
        code = EXIT_BLOWUP
    finally:
        # The manifest stays immutable except for the end timestamp.
        manifest["end_timestamp"] = _utcnow()
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=1)
        log.removeHandler(handler)
        handler.close()
    return code


def cmd_verify(args) -> int:
    from .estimates import SUITES, run_suite
    from .kernels import KernelParams, validate_class

    suites = SUITES + ("all", "kernel_class")
    if args.suite not in suites:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(suites)}",
              file=sys.stderr)
        return EXIT_USAGE
    kwargs = {}
    if args.B:
        kwargs["B_list"] = tuple(args.B)
    if args.suite == "kernel_class":
        reports = [validate_class(KernelParams(),
                                  nsamples=args.samples or 100_000,
                                  seed=args.seed)]
    else:
        reports = run_suite(args.suite, samples=args.samples, seed=args.seed,
                            **kwargs)
    width = max(len(r.lemma_id) for r in reports)
    total = 0
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        extra = ""
        if "fitted_exponent" in r.details:
            extra = f"  exponent={r.details['fitted_exponent']:+.3f}"
        print(f"{r.lemma_id:{width}s}  {status}  samples={r.samples_run:<9d} "
              f"violations={r.violations:<6d} max_slack={r.max_slack:+.3e}{extra}")
        total += r.violations
    if args.json:
        payload = [r.to_dict() for r in reports]
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=1)
    return EXIT_OK if total == 0 else EXIT_VIOLATIONS


def _vector(text: str) -> np.ndarray:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("need three comma-separated components")
    return np.asarray(parts)


def cmd_kinematics(args) -> int:
    try:
        v = _vector(args.v)
        u = _vector(args.u)
        omega = _vector(args.omega)
        rep = {"R": OMEGA_R, "RS": OMEGA_RS}[args.rep]
        scal = collision_scalars(v, u, args.R)
        post = post_collision_omega_R if rep == OMEGA_R else post_collision_omega_RS
        out = post(v, u, omega, args.R)
        record = {
            "scalars": {"v0": scal.v0, "u0": scal.u0, "g": scal.g,
                        "s": scal.s, "v_phi": scal.v_phi},
            "outcome": {"v_prime": out.v_prime.tolist(),
                        "u_prime": out.u_prime.tolist(),
                        "v0_prime": out.v0_prime, "u0_prime": out.u0_prime,
                        "representation": out.representation},
            "energy_defect": energy_defect(v, u, omega, args.R, rep=rep),
            "cutoff_quantity": cutoff_quantity(v, u, omega, args.R),
            "B": args.B,
            "in_cutoff_set": bool(cutoff_quantity(v, u, omega, args.R) <= args.B),
        }
    except (ValueError, KeyError, KinematicsError) as err:
        print(f"kinematics error: {err}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(_plain(record), indent=1))
    return EXIT_OK


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x


def cmd_integrability(args) -> int:
    if not 0.0 <= args.b < 3.0:
        print("b must lie in [0, 3)", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.family == "EdS":
            spec = EinsteinDeSitter(c=args.c)
        elif args.family == "PowerLaw":
            if args.q is None:
                print("PowerLaw needs --q", file=sys.stderr)
                return EXIT_USAGE
            spec = PowerLaw(c=args.c, q=args.q)
        elif args.family == "DeSitter":
            spec = DeSitter(H=args.H)
        else:
            print(f"unknown family {args.family!r}", file=sys.stderr)
            return EXIT_USAGE
        report = integrability(spec, args.b)
    except ValueError as err:
        print(f"integrability error: {err}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(_plain({
        "family": args.family,
        "b": args.b,
        "converges": report.converges,
        "analytic_exponents": report.analytic_exponents,
        "numeric_estimate": report.numeric_estimate,
        "numeric_converges": report.numeric_converges,
    }), indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwboltz", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured simulation")
    p_run.add_argument("config")
    p_run.add_argument("--out", required=True)

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite")
    p_ver.add_argument("--samples", type=int, default=None)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--B", type=float, action="append", default=None,
                       help="cutoff constant(s) for L3_1; repeatable")
    p_ver.add_argument("--json", default=None,
                       help="also write full reports to this JSON file")

    p_kin = sub.add_parser("kinematics", help="one-shot collision record")
    p_kin.add_argument("--v", required=True)
    p_kin.add_argument("--u", required=True)
    p_kin.add_argument("--omega", required=True)
    p_kin.add_argument("--R", type=float, required=True)
    p_kin.add_argument("--rep", choices=("R", "RS"), default="R")
    p_kin.add_argument("--B", type=float, default=1.0)

    p_int = sub.add_parser("integrability", help="forcing integrability verdict")
    p_int.add_argument("--family", required=True)
    p_int.add_argument("--b", type=float, required=True)
    p_int.add_argument("--c", type=float, default=1.0)
    p_int.add_argument("--q", type=float, default=None)
    p_int.add_argument("--H", type=float, default=1.0)
    return parser


def _join_vector_flags(argv):
    # Lets "--u -0.5,0.2,0.4" survive argparse's option detection by
    # rewriting it to "--u=-0.5,0.2,0.4".
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--v", "--u", "--omega") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_join_vector_flags(list(argv)))
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    handlers = {
        "run": cmd_run,
        "verify": cmd_verify,
        "kinematics": cmd_kinematics,
        "integrability": cmd_integrability,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
