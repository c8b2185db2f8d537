"""Command line driver: exit codes, run artifacts, manifest contract,
and the JSON-emitting inspection subcommands.

Everything goes through cli.main(argv) in process; capsys picks up the
table/JSON output and tmp_path holds run directories.
"""

import json
import os

import numpy as np
import pytest

from rwboltz import cli
from rwboltz.config import build_sim_config, parse_pairs
from rwboltz.kinematics import collision_scalars, post_collision_omega_RS

FAST_RUN = """\
cosmology.family = EdS
kernel.b = 1.0
kernel.B = 1.0
grid.vmax = 3.0
grid.n = 8
quad.angular_nodes = 6
quad.u_integration = subsample:2
quad.tail_rtol = 0.0
solver.t_end = 0.2
solver.dt = 0.1
initial.kind = gaussian
initial.eps = 1e-3
initial.width = 2.0
"""

BLOWUP_RUN = FAST_RUN.replace("initial.eps = 1e-3", "initial.eps = 1e8") \
                     .replace("solver.t_end = 0.2", "solver.t_end = 100.0") \
                     .replace("solver.dt = 0.1", "solver.dt = 10.0")


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# run


def test_run_produces_artifacts_and_manifest(tmp_path):
    cfg = write_cfg(tmp_path, FAST_RUN)
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tool_version"]
    assert manifest["seed_registry"] == {}
    assert manifest["config_path"] == cfg
    assert manifest["end_timestamp"] is not None
    assert manifest["start_timestamp"] <= manifest["end_timestamp"]
    # the embedded snapshot parses back to the exact config that ran
    snap = build_sim_config(parse_pairs(manifest["config_snapshot"]))
    assert snap == build_sim_config(parse_pairs(FAST_RUN))

    diag = json.loads((out / "diagnostics.json").read_text())
    assert [r["t"] for r in diag] == [0.0, 0.1, 0.2]
    snaps = sorted(os.listdir(out / "snapshots"))
    assert snaps == ["0000.csv", "0001.csv", "0002.csv"]
    log_text = (out / "run.log").read_text()
    assert "run start" in log_text and "run done" in log_text


def test_run_byte_identical_across_repeats(tmp_path):
    cfg = write_cfg(tmp_path, FAST_RUN)
    blobs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert cli.main(["run", cfg, "--out", str(out)]) == 0
        blobs.append(((out / "diagnostics.json").read_bytes(),
                      (out / "snapshots" / "0002.csv").read_bytes()))
    assert blobs[0] == blobs[1]


@pytest.mark.parametrize("breakage,frag", [
    ("quad.angular_nodes = 6\n::quad.angular_nodes = 2\n", "angular nodes"),
    ("solver.dt = 0.1\n::\n", "missing required key"),
])
def test_run_config_errors_exit_1(tmp_path, capsys, breakage, frag):
    old, new = breakage.split("::")
    cfg = write_cfg(tmp_path, FAST_RUN.replace(old, new))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 1
    assert frag in capsys.readouterr().err


def test_run_missing_config_exit_1(tmp_path, capsys):
    code = cli.main(["run", str(tmp_path / "ghost.cfg"),
                     "--out", str(tmp_path / "o")])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_run_blowup_exit_2_with_partial_outputs(tmp_path):
    cfg = write_cfg(tmp_path, BLOWUP_RUN)
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["end_timestamp"] is not None
    assert os.listdir(out / "snapshots")
    assert "blow-up" in (out / "run.log").read_text()


# ---------------------------------------------------------------------------
# verify


def test_verify_suite_pass_exit_0(capsys):
    assert cli.main(["verify", "L3_1", "--samples", "5000"]) == 0
    out = capsys.readouterr().out
    assert "L3_1" in out and "pass" in out and "violations=0" in out


def test_verify_negative_control_exit_3(capsys):
    code = cli.main(["verify", "L3_1", "--samples", "5000", "--B", "0"])
    assert code == 3
    out = capsys.readouterr().out
    assert "FAIL" in out and "violations=0" not in out


def test_verify_json_report_file(tmp_path, capsys):
    report = tmp_path / "reports.json"
    assert cli.main(["verify", "L2_3", "--json", str(report)]) == 0
    capsys.readouterr()
    payload = json.loads(report.read_text())
    assert all(r["lemma_id"] == "L2_3" for r in payload)
    assert all(r["passed"] for r in payload)


def test_verify_unknown_suite_exit_1(capsys):
    assert cli.main(["verify", "L99"]) == 1
    assert "unknown suite" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# kinematics (negative vector components exercise the =-join preprocessing)


def test_kinematics_record_matches_library(capsys):
    argv = ["kinematics", "--v", "0.3,-0.2,0.1", "--u", "-0.5,0.2,0.4",
            "--omega", "0,0,1", "--R", "2.0", "--rep", "RS", "--B", "0.5"]
    assert cli.main(argv) == 0
    rec = json.loads(capsys.readouterr().out)
    v = np.array([0.3, -0.2, 0.1])
    u = np.array([-0.5, 0.2, 0.4])
    sc = collision_scalars(v, u, 2.0)
    assert rec["scalars"]["g"] == pytest.approx(sc.g, rel=1e-12)
    assert rec["scalars"]["v0"] == pytest.approx(sc.v0, rel=1e-12)
    out = post_collision_omega_RS(v, u, np.array([0.0, 0.0, 1.0]), 2.0)
    np.testing.assert_allclose(rec["outcome"]["v_prime"], out.v_prime,
                               rtol=1e-12)
    assert rec["outcome"]["representation"] == "OmegaRS"
    assert isinstance(rec["in_cutoff_set"], bool)
    assert rec["B"] == 0.5


def test_kinematics_rejects_bad_input(capsys):
    argv = ["kinematics", "--v", "1,0", "--u", "0,1,0", "--omega", "0,0,1",
            "--R", "1.0"]
    assert cli.main(argv) == 1
    argv = ["kinematics", "--v", "1,0,0", "--u", "0,1,0",
            "--omega", "0,0,2", "--R", "1.0"]
    assert cli.main(argv) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# integrability


def test_integrability_json_verdict(capsys):
    assert cli.main(["integrability", "--family", "EdS", "--b", "2.0"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["converges"] is True and rec["numeric_converges"] is True
    assert cli.main(["integrability", "--family", "PowerLaw", "--b", "2.999",
                     "--q", "0.4"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["converges"] is False


def test_integrability_usage_errors(capsys):
    assert cli.main(["integrability", "--family", "EdS", "--b", "3.5"]) == 1
    assert cli.main(["integrability", "--family", "PowerLaw", "--b", "1.0"]) == 1
    err = capsys.readouterr().err
    assert "must lie in [0, 3)" in err and "needs --q" in err


# ---------------------------------------------------------------------------
# argparse plumbing


def test_bad_usage_exit_1():
    assert cli.main([]) == 1
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["run"]) == 1            # missing --out


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "rwboltz" in capsys.readouterr().out
