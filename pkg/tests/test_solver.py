"""Time integrator: config validation, RK4 order, conservation of the
diagnostic contracts, stationarity of detailed-balance data, clamping
and blow-up bookkeeping, and the output writer.

All runs here use an 8^3 grid with a subsampled u-rule so the whole file
stays under half a minute; the integrator sees only a different (still
smooth, still quadratic) right-hand side, so its order and bookkeeping
are exercised exactly as at production sizes.
"""

import json
import os
import warnings

import numpy as np
import pytest

from rwboltz.collision import QuadratureSpec, SubsampledGrid
from rwboltz.cosmology import DeSitter
from rwboltz.distribution import EquilibriumParams, VGrid
from rwboltz.kernels import SMOOTH, KernelParams
from rwboltz.solver import (
    DIAGNOSTIC_KEYS,
    BlowUpError,
    Equilibrium,
    FromFile,
    Gaussian,
    SimConfig,
    initial_field,
    run,
    step_rk4,
    write_outputs,
)

COSMO = DeSitter(H=1e-9)        # R = 1 to ten digits over any test horizon
KERNEL = KernelParams(b=1.0, B=1.0, angular_mode=SMOOTH, smooth_width=0.25)
GRID = VGrid(vmax=3.0, n=8)
QUAD = QuadratureSpec(6, SubsampledGrid(2), 0.0)


def config(initial, t_end, dt, **kw):
    return SimConfig(COSMO, KERNEL, GRID, QUAD, initial, t_end, dt, **kw)


def rk4_richardson_ratio(cfg):
    """One-step Richardson quotient against a dt/8 reference.

    For a fourth-order one-step method the local error scales like dt^5,
    so halving the step across the same interval divides the defect by
    2^4 up to higher-order terms.  Any clamping voids the smoothness
    assumption, so the caller must pick data that stays positive.
    """
    dt = cfg.dt
    y0 = initial_field(cfg).values
    y1, c1 = step_rk4(y0, 0.0, dt, cfg)
    y2, c2 = y0, 0.0
    for k in range(2):
        y2, c = step_rk4(y2, k * dt / 2.0, dt / 2.0, cfg)
        c2 += c
    ref = y0
    for k in range(8):
        ref, _ = step_rk4(ref, k * dt / 8.0, dt / 8.0, cfg)
    assert c1 == 0.0 and c2 == 0.0, "clamping voids the order measurement"
    return np.max(np.abs(y1 - ref)) / np.max(np.abs(y2 - ref))


# ---------------------------------------------------------------------------
# config validation


def test_simconfig_rejects_bad_values():
    good = dict(cosmology=COSMO, kernel=KERNEL, grid=GRID, quad=QUAD,
                initial=Gaussian(1e-3, 2.0), t_end=1.0, dt=0.1)
    SimConfig(**good)
    for bad in (dict(t_end=0.0), dict(dt=-0.1), dict(snapshot_every=0),
                dict(rep="sideways")):
        with pytest.raises(ValueError):
            SimConfig(**{**good, **bad})


def test_unknown_initial_data_rejected():
    cfg = config(Gaussian(1e-3, 2.0), 1.0, 0.5)
    object.__setattr__(cfg, "initial", 42)
    with pytest.raises(ValueError):
        initial_field(cfg)


# ---------------------------------------------------------------------------
# integrator order


def test_rk4_one_step_richardson_ratio():
    cfg = config(Gaussian(0.05, 1.5), 0.0625, 0.0625)
    ratio = rk4_richardson_ratio(cfg)
    assert 10.0 <= ratio <= 24.0, ratio


# ---------------------------------------------------------------------------
# run loop bookkeeping


def test_zero_data_stays_zero():
    res = run(config(Gaussian(0.0, 1.5), 0.4, 0.2))
    assert res.fitted_C == 0.0
    for key in ("grid_norm", "running_norm", "mass", "energy", "entropy",
                "decay_certificate", "clamped_mass"):
        assert np.all(res.diagnostics.column(key) == 0.0), key
    for _, field in res.snapshots:
        assert np.all(field.values == 0.0)


def test_diagnostics_contract():
    res = run(config(Gaussian(0.05, 1.5), 1.0, 0.25))
    for rec in res.diagnostics.records:
        assert set(rec) == set(DIAGNOSTIC_KEYS)
        assert isinstance(rec["momentum"], list) and len(rec["momentum"]) == 3
    running = res.diagnostics.column("running_norm")
    budget = res.diagnostics.column("budget")
    assert np.all(np.diff(running) >= 0.0)
    assert np.all(np.diff(budget) >= 0.0)
    assert np.all(res.diagnostics.column("grid_norm") <= running)
    assert budget[0] == 0.0 and budget[-1] > 0.0
    # forcing integral at frozen R = 1 with b = 1: R^-3 + R^(b-4) = 2
    assert budget[-1] == pytest.approx(2.0 * 1.0, rel=1e-6)
    assert res.fitted_C >= 0.0


def test_snapshot_cadence_and_final_overshoot():
    res = run(config(Gaussian(0.0, 1.5), 1.75, 0.25, snapshot_every=3))
    assert [t for t, _ in res.snapshots] == [0.0, 0.75, 1.5, 1.75]
    # t_end not an integer multiple of dt: one extra step past t_end
    res = run(config(Gaussian(0.0, 1.5), 0.3, 0.2))
    assert res.snapshots[-1][0] == pytest.approx(0.4)


def test_run_deterministic():
    a = run(config(Gaussian(0.05, 1.5), 0.25, 0.25))
    b = run(config(Gaussian(0.05, 1.5), 0.25, 0.25))
    assert a.diagnostics.to_json() == b.diagnostics.to_json()
    np.testing.assert_array_equal(a.snapshots[-1][1].values,
                                  b.snapshots[-1][1].values)


# ---------------------------------------------------------------------------
# stationarity of detailed-balance data at frozen R


def test_equilibrium_nearly_stationary():
    init = Equilibrium(EquilibriumParams(alpha=np.log(1e-3), gamma=2.0))
    res = run(config(init, 0.5, 0.1))
    f0 = res.snapshots[0][1].values
    fT = res.snapshots[-1][1].values
    # residual is pure quadrature error, about 10% of the tiny loss term
    assert np.max(np.abs(fT - f0)) <= 0.02 * np.max(f0)
    norms = res.diagnostics.column("grid_norm")
    assert abs(norms[-1] / norms[0] - 1.0) <= 5e-3


# ---------------------------------------------------------------------------
# clamping and blow-up


def test_step_clamps_negative_values():
    cfg = config(Gaussian(0.05, 1.5), 2.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = run(cfg)
    clamped = res.diagnostics.column("clamped_mass")
    assert clamped[0] == 0.0 and clamped[-1] > 0.0
    assert np.all(np.diff(clamped) >= 0.0)
    for _, field in res.snapshots:
        assert np.all(field.values >= 0.0)


def test_blowup_carries_partial_result():
    cfg = config(Gaussian(1e8, 2.0), 100.0, 10.0)
    with pytest.raises(BlowUpError) as err:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            run(cfg)
    partial = err.value.partial
    assert partial is not None
    assert err.value.t <= 100.0
    assert len(partial.snapshots) >= 1
    assert partial.diagnostics.records
    assert partial.config is cfg


def test_large_step_warns():
    # dt far beyond the stability estimate: the run must complain up
    # front (it happens to survive by clamping the overshoot to zero)
    cfg = config(Gaussian(10.0, 2.0), 10.0, 10.0)
    with pytest.warns(RuntimeWarning, match="Lipschitz"):
        run(cfg)


# ---------------------------------------------------------------------------
# outputs


def test_write_outputs_and_from_file_roundtrip(tmp_path):
    res = run(config(Gaussian(0.05, 1.5), 0.25, 0.25))
    write_outputs(res, str(tmp_path))
    snaps = sorted(os.listdir(tmp_path / "snapshots"))
    assert snaps == ["0000.csv", "0001.csv"]
    with open(tmp_path / "snapshots" / "0000.csv") as fh:
        header = fh.readline().strip()
        rows = fh.readlines()
    assert header == "t,v1,v2,v3,f"
    assert len(rows) == 8 ** 3
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert [r["t"] for r in diag] == [0.0, 0.25]
    assert set(diag[0]) == set(DIAGNOSTIC_KEYS)

    # repr-printed floats reload bit-exactly as initial data
    cfg2 = config(FromFile(str(tmp_path / "snapshots" / "0001.csv")),
                  1.0, 0.5)
    reloaded = initial_field(cfg2)
    np.testing.assert_array_equal(reloaded.values, res.snapshots[-1][1].values)
