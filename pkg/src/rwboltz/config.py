"""Flat key=value run configuration.

One `key = value` pair per line, `#` starts a comment, blank lines are
ignored.  Keys are namespaced with dots (cosmology.*, kernel.*, grid.*,
quad.*, solver.*, initial.*).  The format is deliberately primitive: any
language can parse it, and config snapshots diff cleanly inside run
manifests.

Example::

    cosmology.family = EdS
    cosmology.c = 1.0
    kernel.b = 1.0
    kernel.B = 1.0
    kernel.angular_mode = smooth
    grid.vmax = 4.0
    grid.n = 32
    quad.angular_nodes = 6
    quad.u_integration = subsample:5
    quad.tail_rtol = 1e-8
    solver.rep = OmegaR
    solver.dt = 0.05
    solver.t_end = 10.0
    solver.snapshot_every = 10
    initial.kind = gaussian
    initial.eps = 1e-3
    initial.width = 2.0
"""

from __future__ import annotations

import numpy as np

from .collision import QuadratureSpec, ReuseGrid, SubsampledGrid
from .cosmology import DeSitter, EinsteinDeSitter, PowerLaw
from .distribution import EquilibriumParams, VGrid
from .kernels import SHARP, SMOOTH, KernelParams
from .kinematics import OMEGA_R
from .solver import Equilibrium, FromFile, Gaussian, SimConfig

__all__ = ["ConfigError", "parse_pairs", "build_sim_config", "load_sim_config",
           "serialize_sim_config"]


class ConfigError(ValueError):
    """Config syntax or semantics problem, annotated with a line number."""

    def __init__(self, message: str, line: int = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def parse_pairs(text: str) -> dict:
    """Parse flat key=value text into an ordered dict of strings."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        pairs[key] = (value, lineno)
    return pairs


class _Reader:
    def __init__(self, pairs: dict):
        self.pairs = dict(pairs)
        self.used = set()

    def take(self, key, conv, default=...):
        if key not in self.pairs:
            if default is ...:
                raise ConfigError(f"missing required key {key}")
            return default
        value, lineno = self.pairs[key]
        self.used.add(key)
        try:
            return conv(value)
        except ConfigError:
            raise
        except Exception as err:
            raise ConfigError(f"bad value for {key}: {value!r} ({err})", lineno)

    def unknown(self):
        return [k for k in self.pairs if k not in self.used]

    def line_of(self, key):
        return self.pairs[key][1] if key in self.pairs else None

    def first_line(self, prefix):
        lines = [ln for k, (_, ln) in self.pairs.items() if k.startswith(prefix)]
        return min(lines) if lines else None


def _checked(rd: _Reader, prefix: str, ctor, **kwargs):
    """Construct a validating dataclass, mapping its ValueError to the
    first config line of the keys that fed it."""
    try:
        return ctor(**kwargs)
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err), rd.first_line(prefix))


def _as_vector(value: str):
    parts = [float(p) for p in value.split(",")]
    if len(parts) != 3:
        raise ValueError("need exactly three comma-separated components")
    return tuple(parts)


def _u_integration(value: str):
    if value == "reuse":
        return ReuseGrid()
    if value.startswith("subsample:"):
        return SubsampledGrid(stride=int(value.split(":", 1)[1]))
    raise ValueError("expected 'reuse' or 'subsample:<stride>'")


def _cosmology(rd: _Reader):
    family = rd.take("cosmology.family", str)
    if family == "EdS":
        return _checked(rd, "cosmology.", EinsteinDeSitter,
                        c=rd.take("cosmology.c", float, 1.0))
    if family == "PowerLaw":
        return _checked(rd, "cosmology.", PowerLaw,
                        c=rd.take("cosmology.c", float),
                        q=rd.take("cosmology.q", float))
    if family == "DeSitter":
        return _checked(rd, "cosmology.", DeSitter,
                        H=rd.take("cosmology.H", float))
    raise ConfigError(f"unknown cosmology.family {family!r}",
                      rd.line_of("cosmology.family"))


def _initial(rd: _Reader):
    kind = rd.take("initial.kind", str)
    if kind == "gaussian":
        return Gaussian(eps=rd.take("initial.eps", float),
                        width=rd.take("initial.width", float))
    if kind == "equilibrium":
        params = _checked(
            rd, "initial.", EquilibriumParams,
            alpha=rd.take("initial.alpha", float),
            beta=np.asarray(rd.take("initial.beta", _as_vector, (0.0, 0.0, 0.0))),
            gamma=rd.take("initial.gamma", float, 1.0))
        return Equilibrium(params)
    if kind == "from_file":
        return FromFile(path=rd.take("initial.path", str))
    raise ConfigError(f"unknown initial.kind {kind!r}", rd.line_of("initial.kind"))


def build_sim_config(pairs: dict) -> SimConfig:
    """Assemble a SimConfig from parsed pairs, validating as it goes."""
    rd = _Reader(pairs)
    cosmo = _cosmology(rd)
    mode = rd.take("kernel.angular_mode", str, SHARP)
    if mode not in (SHARP, SMOOTH):
        raise ConfigError("kernel.angular_mode must be sharp or smooth",
                          rd.line_of("kernel.angular_mode"))
    kernel = _checked(
        rd, "kernel.", KernelParams,
        A=rd.take("kernel.A", float, 1.0),
        b=rd.take("kernel.b", float),
        sigma1=rd.take("kernel.sigma1", float, 1.0),
        B=rd.take("kernel.B", float),
        angular_mode=mode,
        smooth_width=rd.take("kernel.smooth_width", float, 0.25))
    grid = _checked(rd, "grid.", VGrid,
                    vmax=rd.take("grid.vmax", float),
                    n=rd.take("grid.n", int))
    quad = _checked(
        rd, "quad.", QuadratureSpec,
        angular_nodes=rd.take("quad.angular_nodes", int, 6),
        u_integration=rd.take("quad.u_integration", _u_integration, ReuseGrid()),
        tail_rtol=rd.take("quad.tail_rtol", float, 1e-8))
    initial = _initial(rd)
    config = _checked(
        rd, "solver.", SimConfig,
        cosmology=cosmo, kernel=kernel, grid=grid, quad=quad, initial=initial,
        t_end=rd.take("solver.t_end", float),
        dt=rd.take("solver.dt", float),
        rep=rd.take("solver.rep", str, OMEGA_R),
        snapshot_every=rd.take("solver.snapshot_every", int, 1))
    extra = rd.unknown()
    if extra:
        key = extra[0]
        raise ConfigError(f"unknown key {key!r}", rd.line_of(key))
    return config


def load_sim_config(path: str) -> SimConfig:
    with open(path) as fh:
        return build_sim_config(parse_pairs(fh.read()))


def serialize_sim_config(config: SimConfig) -> str:
    """Canonical flat text for manifests; parses back to an equal config."""
    lines = []
    cosmo = config.cosmology
    if isinstance(cosmo, EinsteinDeSitter):
        lines += ["cosmology.family = EdS", f"cosmology.c = {cosmo.c!r}"]
    elif isinstance(cosmo, PowerLaw):
        lines += ["cosmology.family = PowerLaw", f"cosmology.c = {cosmo.c!r}",
                  f"cosmology.q = {cosmo.q!r}"]
    elif isinstance(cosmo, DeSitter):
        lines += ["cosmology.family = DeSitter", f"cosmology.H = {cosmo.H!r}"]
    else:
        raise ConfigError(f"cannot serialize cosmology {cosmo!r}")
    k = config.kernel
    lines += [f"kernel.A = {k.A!r}", f"kernel.b = {k.b!r}",
              f"kernel.sigma1 = {k.sigma1!r}", f"kernel.B = {k.B!r}",
              f"kernel.angular_mode = {k.angular_mode}",
              f"kernel.smooth_width = {k.smooth_width!r}"]
    lines += [f"grid.vmax = {config.grid.vmax!r}", f"grid.n = {config.grid.n}"]
    q = config.quad
    if isinstance(q.u_integration, SubsampledGrid):
        u_spec = f"subsample:{q.u_integration.stride}"
    else:
        u_spec = "reuse"
    lines += [f"quad.angular_nodes = {q.angular_nodes}",
              f"quad.u_integration = {u_spec}",
              f"quad.tail_rtol = {q.tail_rtol!r}"]
    lines += [f"solver.rep = {config.rep}", f"solver.dt = {config.dt!r}",
              f"solver.t_end = {config.t_end!r}",
              f"solver.snapshot_every = {config.snapshot_every}"]
    init = config.initial
    if isinstance(init, Gaussian):
        lines += ["initial.kind = gaussian", f"initial.eps = {init.eps!r}",
                  f"initial.width = {init.width!r}"]
    elif isinstance(init, Equilibrium):
        p = init.params
        beta = ",".join(repr(float(x)) for x in np.asarray(p.beta))
        lines += ["initial.kind = equilibrium", f"initial.alpha = {p.alpha!r}",
                  f"initial.beta = {beta}", f"initial.gamma = {p.gamma!r}"]
    elif isinstance(init, FromFile):
        lines += ["initial.kind = from_file", f"initial.path = {init.path}"]
    else:
        raise ConfigError(f"cannot serialize initial data {init!r}")
    return "\n".join(lines) + "\n"
