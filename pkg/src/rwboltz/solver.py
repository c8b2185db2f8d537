"""Fixed-step time integration of df/dt = Q(f,f) on the momentum grid.

The grid ODE system is integrated with classical RK4.  The equation is
non-stiff in the small-data regime (Q scales like the squared field times
the decaying factor R^-3), so an explicit method with order verification
is preferred over implicit machinery.

Per-snapshot diagnostics mirror the monitored quantities of the analysis:
the instantaneous weighted grid norm, its running supremum over time, the
pointwise decay certificate sup e^{|v|^2} f, moments, entropy, and the
accumulated forcing budget of the scale factor, i.e. the integral of
R^-3 + R^(b-4).  After a run the smallest constant C closing the
bootstrap-shaped bound

    running_norm(t) <= ||f0|| + C * running_norm(t)^2 * budget(t)

is fitted and reported; it is a diagnostic, never asserted against a
reference value.

Negative values produced by a step (quadrature undershoot) are clamped to
zero and the clamped mass is accounted; NaN or Inf in any stage aborts
with BlowUpError carrying the diagnostics collected so far.
"""

from __future__ import annotations

import json
import logging
import math
import os
import warnings
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Union

import numpy as np

from .collision import ADAPTIVE, QuadratureSpec, q_field_array
from .cosmology import ScaleFactorSpec, forcing
from .distribution import (
    DistributionField,
    EquilibriumParams,
    VGrid,
    decay_certificate,
    entropy,
    equilibrium,
    gaussian_initial_data,
    moments,
    weighted_norm,
)
from .kernels import KernelParams
from .kinematics import OMEGA_R, OMEGA_RS

__all__ = [
    "Gaussian",
    "Equilibrium",
    "FromFile",
    "SimConfig",
    "DiagnosticsSeries",
    "RunResult",
    "BlowUpError",
    "initial_field",
    "step_rk4",
    "run",
    "write_outputs",
    "entropy",
]

log = logging.getLogger("rwboltz")

DIAGNOSTIC_KEYS = (
    "t", "grid_norm", "running_norm", "decay_certificate",
    "mass", "momentum", "energy", "entropy", "budget", "clamped_mass",
)


@dataclass(frozen=True)
class Gaussian:
    """Isotropic initial data eps * exp(-width |v|^2)."""

    eps: float
    width: float


@dataclass(frozen=True)
class Equilibrium:
    """Detailed-balance initial data at the initial scale factor."""

    params: EquilibriumParams


@dataclass(frozen=True)
class FromFile:
    """Initial data loaded from a snapshot CSV (columns t,v1,v2,v3,f)."""

    path: str


InitialData = Union[Gaussian, Equilibrium, FromFile]


@dataclass(frozen=True)
class SimConfig:
    cosmology: ScaleFactorSpec
    kernel: KernelParams
    grid: VGrid
    quad: QuadratureSpec
    initial: InitialData
    t_end: float
    dt: float
    rep: str = OMEGA_R
    snapshot_every: int = 1

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be a positive integer")
        if self.rep not in (OMEGA_R, OMEGA_RS, ADAPTIVE):
            raise ValueError(f"unknown representation {self.rep!r}")


@dataclass
class DiagnosticsSeries:
    """Per-snapshot records with the fixed key set DIAGNOSTIC_KEYS.

    running_norm and budget are nondecreasing along the series.
    """

    records: list = dataclass_field(default_factory=list)

    def append(self, rec: dict):
        assert set(rec) == set(DIAGNOSTIC_KEYS)
        self.records.append(rec)

    def column(self, key: str) -> np.ndarray:
        return np.asarray([r[key] for r in self.records])

    def to_json(self) -> str:
        return json.dumps(self.records, indent=1)


@dataclass
class RunResult:
    snapshots: list          # [(t, DistributionField)]
    diagnostics: DiagnosticsSeries
    fitted_C: float
    config: SimConfig


class BlowUpError(RuntimeError):
    """Raised when an integrator stage produces NaN or Inf."""

    def __init__(self, t: float, partial: Optional[RunResult] = None):
        super().__init__(f"solution blew up at t = {t:.6g}")
        self.t = t
        self.partial = partial


def initial_field(config: SimConfig) -> DistributionField:
    init = config.initial
    if isinstance(init, Gaussian):
        return gaussian_initial_data(init.eps, init.width, config.grid)
    if isinstance(init, Equilibrium):
        R0 = float(config.cosmology.R(0.0))
        return equilibrium(init.params, R0, config.grid)
    if isinstance(init, FromFile):
        data = np.loadtxt(init.path, delimiter=",", skiprows=1)
        vals = data[:, 4].reshape((config.grid.n,) * 3)
        return DistributionField(config.grid, vals)
    raise ValueError(f"unknown initial data {init!r}")


def _rhs(values: np.ndarray, t: float, config: SimConfig) -> np.ndarray:
    return q_field_array(values, config.grid, t, config.cosmology,
                         config.kernel, config.quad, config.rep)


def step_rk4(values: np.ndarray, t: float, dt: float, config: SimConfig):
    """One classical RK4 step on the raw value array.

    Returns (clamped values, mass removed by clamping).  Stage values may
    transiently undershoot zero; only the final state is clamped.
    """
    k1 = _rhs(values, t, config)
    k2 = _rhs(values + 0.5 * dt * k1, t + 0.5 * dt, config)
    k3 = _rhs(values + 0.5 * dt * k2, t + 0.5 * dt, config)
    k4 = _rhs(values + dt * k3, t + dt, config)
    new = values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise BlowUpError(t + dt)
    neg = np.minimum(new, 0.0)
    clamped = float(-np.sum(config.grid.trapezoid_weights() * neg))
    return np.maximum(new, 0.0), clamped


def _record(t, values, config, running_norm, budget, clamped_total):
    field = DistributionField(config.grid, values)
    grid_norm = weighted_norm(field)
    running_norm = max(running_norm, grid_norm)
    mom = moments(field, float(config.cosmology.R(t)))
    rec = {
        "t": float(t),
        "grid_norm": grid_norm,
        "running_norm": running_norm,
        "decay_certificate": decay_certificate(field),
        "mass": mom.mass,
        "momentum": [float(c) for c in mom.momentum],
        "energy": mom.energy,
        "entropy": entropy(field),
        "budget": float(budget),
        "clamped_mass": float(clamped_total),
    }
    return field, rec, running_norm


def _fit_C(diag: DiagnosticsSeries, norm0: float) -> float:
    # Smallest C with running_norm <= norm0 + C running_norm^2 budget
    # across all snapshots; 0 when the norm never exceeds its start.
    best = 0.0
    for r in diag.records:
        w, g = r["running_norm"], r["budget"]
        if g > 0.0 and w > 0.0:
            best = max(best, (w - norm0) / (w * w * g))
    return best


def _lipschitz_warning(values, config):
    # Crude Lipschitz proxy: Q is quadratic in f, so |dQ/df| ~ 2|Q|/|f|.
    scale = float(np.max(values))
    if scale <= 0.0:
        return
    q0 = float(np.max(np.abs(_rhs(values, 0.0, config))))
    lip = 2.0 * q0 / scale
    if config.dt * lip > 0.5:
        warnings.warn(
            f"dt * estimated Lipschitz constant = {config.dt * lip:.3g} > 0.5; "
            "the explicit step may be inaccurate or unstable", RuntimeWarning)


def run(config: SimConfig) -> RunResult:
    """Integrate to t_end, collecting snapshots every snapshot_every steps.

    Raises BlowUpError (with .partial holding everything recorded so far)
    if a stage goes non-finite.
    """
    values = initial_field(config).values.copy()
    _lipschitz_warning(values, config)
    nsteps = int(round(config.t_end / config.dt))
    if abs(nsteps * config.dt - config.t_end) > 1e-9 * max(1.0, config.t_end):
        nsteps = int(math.ceil(config.t_end / config.dt))
    b = config.kernel.b
    diag = DiagnosticsSeries()
    snapshots = []
    budget = 0.0
    clamped_total = 0.0
    running = 0.0
    field, rec, running = _record(0.0, values, config, running, budget, 0.0)
    norm0 = rec["grid_norm"]
    diag.append(rec)
    snapshots.append((0.0, field))
    log.info("run start: %d steps of dt=%g, %d^3 grid", nsteps, config.dt, config.grid.n)
    t = 0.0
    for step in range(1, nsteps + 1):
        dt = config.dt
        try:
            values, clamped = step_rk4(values, t, dt, config)
        except BlowUpError as err:
            err.partial = RunResult(snapshots, diag, _fit_C(diag, norm0), config)
            log.error("blow-up at t=%g", err.t)
            raise
        clamped_total += clamped
        # Simpson increment of the forcing integral R^-3 + R^(b-4).
        budget += (dt / 6.0) * (forcing(config.cosmology, b, t)
                                + 4.0 * forcing(config.cosmology, b, t + 0.5 * dt)
                                + forcing(config.cosmology, b, t + dt))
        t = step * config.dt
        if step % config.snapshot_every == 0 or step == nsteps:
            field, rec, running = _record(t, values, config, running, budget,
                                          clamped_total)
            diag.append(rec)
            snapshots.append((t, field))
            log.info("t=%-8g norm=%.6g running=%.6g mass=%.6g clamped=%.3g",
                     t, rec["grid_norm"], running, rec["mass"], clamped_total)
    fitted = _fit_C(diag, norm0)
    log.info("run done: fitted bootstrap constant C = %.6g", fitted)
    return RunResult(snapshots, diag, fitted, config)


def write_outputs(result: RunResult, outdir: str):
    """Emit snapshots/NNNN.csv, diagnostics.json and run.log records."""
    os.makedirs(os.path.join(outdir, "snapshots"), exist_ok=True)
    grid = result.config.grid
    coords = grid.node_coords()
    for k, (t, field) in enumerate(result.snapshots):
        path = os.path.join(outdir, "snapshots", f"{k:04d}.csv")
        flat = field.values.ravel()
        # repr of Python floats round-trips bit-exactly through loadtxt;
        # numpy scalar reprs would not even parse
        with open(path, "w") as fh:
            fh.write("t,v1,v2,v3,f\n")
            for (x, y, z), val in zip(coords.tolist(), flat.tolist()):
                fh.write(f"{t!r},{x!r},{y!r},{z!r},{val!r}\n")
    with open(os.path.join(outdir, "diagnostics.json"), "w") as fh:
        fh.write(result.diagnostics.to_json())
        fh.write("\n")
