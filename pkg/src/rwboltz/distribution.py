"""Grid representation of the distribution function in the transformed variable.

The distribution f(t, v) lives on a uniform cubic grid in v with f = 0
outside the cube; admissible data decays like exp(-width |v|^2) with
width > 1, so the truncation error is controlled by choosing the cube
large enough that the weighted tail is negligible at the boundary.

The solution is measured in the weighted sup-norm

    ||f|| = max over grid nodes, j in {0,1}, k in {1,2,3}
            of | e^{|v|^2} D_k^j f |,

with first derivatives approximated by central finite differences
(one-sided at the cube boundary).  The time-running supremum that the
contraction argument uses is maintained by the solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import lift

__all__ = [
    "VGrid",
    "DistributionField",
    "EquilibriumParams",
    "Moments",
    "interpolate",
    "weighted_norm",
    "decay_certificate",
    "moments",
    "entropy",
    "equilibrium",
    "gaussian_initial_data",
]


@dataclass(frozen=True)
class VGrid:
    """Uniform cubic grid: n points per axis on [-vmax, vmax]^3."""

    vmax: float
    n: int

    def __post_init__(self):
        if not self.vmax > 0.0:
            raise ValueError("vmax must be positive")
        if self.n < 8:
            raise ValueError("need at least 8 points per axis")

    @property
    def h(self) -> float:
        return 2.0 * self.vmax / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.vmax, self.vmax, self.n)

    def squared_radius(self) -> np.ndarray:
        """|v|^2 at every node, shape (n, n, n)."""
        x = self.axis
        x2 = x * x
        return x2[:, None, None] + x2[None, :, None] + x2[None, None, :]

    def node_coords(self) -> np.ndarray:
        """All node coordinates, shape (n^3, 3), C order."""
        x = self.axis
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def trapezoid_weights(self) -> np.ndarray:
        """Product trapezoid weights over the cube, shape (n, n, n)."""
        w = np.full(self.n, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w[:, None, None] * w[None, :, None] * w[None, None, :]


@dataclass(frozen=True)
class DistributionField:
    """Nonnegative samples of f on a VGrid; an immutable snapshot."""

    grid: VGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.n,) * 3:
            raise ValueError(f"values must have shape {(self.grid.n,) * 3}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if np.any(vals < 0.0):
            raise ValueError("field values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def interpolate(field: DistributionField, v) -> np.ndarray:
    """Trilinear interpolation of the field, zero outside the cube.

    Exact at grid nodes; an edge midpoint returns the mean of its two
    node values.
    """
    grid = field.grid
    v = np.asarray(v, dtype=float)
    t = (v + grid.vmax) / grid.h
    inside = np.all((t >= 0.0) & (t <= grid.n - 1.0), axis=-1)
    t = np.clip(t, 0.0, grid.n - 1.0)
    i = np.minimum(t.astype(np.int64), grid.n - 2)
    f = t - i
    ix, iy, iz = i[..., 0], i[..., 1], i[..., 2]
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    vals = field.values
    c00 = vals[ix, iy, iz] * (1 - fx) + vals[ix + 1, iy, iz] * fx
    c10 = vals[ix, iy + 1, iz] * (1 - fx) + vals[ix + 1, iy + 1, iz] * fx
    c01 = vals[ix, iy, iz + 1] * (1 - fx) + vals[ix + 1, iy, iz + 1] * fx
    c11 = vals[ix, iy + 1, iz + 1] * (1 - fx) + vals[ix + 1, iy + 1, iz + 1] * fx
    c0 = c00 * (1 - fy) + c10 * fy
    c1 = c01 * (1 - fy) + c11 * fy
    return np.where(inside, c0 * (1 - fz) + c1 * fz, 0.0)


def _weight(grid: VGrid) -> np.ndarray:
    return np.exp(grid.squared_radius())


def decay_certificate(field: DistributionField) -> float:
    """max over nodes of e^{|v|^2} f, the pointwise decay monitor.

    In the original momentum variable p = v / R^2 this is the constant
    C in the Gaussian envelope f(t, p) <= C exp(-R^4 |p|^2).
    """
    return float(np.max(_weight(field.grid) * field.values))


def weighted_norm(field: DistributionField) -> float:
    """Instantaneous weighted sup-norm over the value and its gradient."""
    w = _weight(field.grid)
    best = np.max(w * field.values)
    for d in np.gradient(field.values, field.grid.h):
        best = max(best, np.max(w * np.abs(d)))
    return float(best)


@dataclass(frozen=True)
class Moments:
    mass: float
    momentum: np.ndarray
    energy: float


def moments(field: DistributionField, R: float) -> Moments:
    """Trapezoid integrals of f, v f and v0(R) f over the cube."""
    grid = field.grid
    w3 = grid.trapezoid_weights()
    wf = w3 * field.values
    x = grid.axis
    mom = np.array(
        [
            np.sum(wf * x[:, None, None]),
            np.sum(wf * x[None, :, None]),
            np.sum(wf * x[None, None, :]),
        ]
    )
    v0 = np.sqrt(1.0 + grid.squared_radius() / (R * R))
    return Moments(mass=float(np.sum(wf)), momentum=mom, energy=float(np.sum(wf * v0)))


def entropy(field: DistributionField) -> float:
    """Trapezoid integral of f log f with 0 log 0 = 0."""
    f = field.values
    with np.errstate(divide="ignore", invalid="ignore"):
        flogf = np.where(f > 0.0, f * np.log(f), 0.0)
    return float(np.sum(field.grid.trapezoid_weights() * flogf))


@dataclass(frozen=True)
class EquilibriumParams:
    """Parameters (alpha, beta, gamma) of e^{alpha + beta.v - gamma v0}."""

    alpha: float
    beta: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")


def equilibrium(params: EquilibriumParams, R: float, grid: VGrid) -> DistributionField:
    """Detailed-balance field e^{alpha + beta.v - gamma v0(R)} on the grid.

    The exponent is a collision invariant (1, v, v0 all conserve), so the
    gain and loss integrands cancel pointwise at this same R and the
    collision operator vanishes up to quadrature error.  Boundedness in v
    needs gamma > R |beta| since v0 >= |v| / R.
    """
    beta = np.asarray(params.beta, dtype=float)
    if not params.gamma > R * np.linalg.norm(beta):
        raise ValueError("need gamma > R |beta| for a bounded profile")
    coords = grid.node_coords()
    expo = params.alpha + coords @ beta - params.gamma * lift(coords, R)
    return DistributionField(grid, np.exp(expo).reshape((grid.n,) * 3))


def gaussian_initial_data(eps: float, width: float, grid: VGrid) -> DistributionField:
    """Small isotropic data eps * exp(-width |v|^2); needs width > 1.

    The weighted profile e^{|v|^2} f then still decays, which is the
    admissibility condition for the weighted-norm theory.
    """
    if eps < 0.0:
        raise ValueError("amplitude eps must be nonnegative")
    if not width > 1.0:
        raise ValueError("width must exceed 1 so the weighted profile decays")
    return DistributionField(grid, eps * np.exp(-width * grid.squared_radius()))
