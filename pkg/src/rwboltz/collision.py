"""Numerical evaluation of the transformed collision operator.

At scale factor R = R(t) the operator is

    Q(f,f)(v) = R^-3 * integral over (u, direction) of
                v_phi sigma [ f(v') f(u') - f(v) f(u) ],

with the post-collisional pair (v', u') produced by either parametrization
from `kinematics` and the premultiplied kernel factor v_phi*sigma evaluated
through `kernels.vphi_sigma`.  Two evaluators are provided:

* a deterministic product quadrature (`q_eval`, `q_field`): Gauss-Legendre
  in cos(theta) times uniform midpoints in phi for the angular integral,
  and trapezoid sums over grid nodes (all of them, or a mirror-symmetric
  strided subset) for the u integral;
* a Monte Carlo oracle (`q_mc`, `weak_moment`, `entropy_production_mc`)
  importance-sampling u from exp(-|u|^2) and directions uniformly.

Post-collisional values of f come from trilinear interpolation and vanish
outside the grid cube, consistent with the compact-support truncation.
Terms with g < 1e-14 are skipped: there v' = v and u' = u, so the bracket
vanishes identically and skipping removes the 0*inf ambiguity of the
g^(1-b) factor without biasing the integral.

Certified tail skipping
-----------------------
The deterministic quadrature can provably ignore most (v, u) pairs in the
Gaussian tails.  With W1 = max e^{|v|^2}|f| and W2 = max e^{2|v|^2}|f| on
the grid, every f value obeys f <= K W e^{-kappa|v|^2} (K is a computable
trilinear-overshoot constant), and on the cutoff support the post-
collisional pair satisfies |v'|^2 + |u'|^2 >= |v|^2 + |u|^2 - B, so the
gain term inherits the same Gaussian smallness as the loss term.  A pair
is dropped only when its whole angular sum is provably below a per-pair
budget; the neglected total at a target v is then at most

    tail_rtol * W1^2 * e^{-|v|^2},

the natural pointwise scale of Q itself.  tail_rtol = 0 disables skipping.
The rule depends only on (v, u), never on threads or summation order, so
results stay bit-reproducible and representation comparisons are unharmed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit, prange

from .distribution import DistributionField, VGrid, interpolate
from .kernels import SHARP, KernelParams, cutoff_weight, vphi_sigma
from .kinematics import (
    OMEGA_R,
    OMEGA_RS,
    CollisionOutcome,
    collision_scalars,
    cutoff_quantity,
    lift,
    omega_hat_from_omega,
    post_collision_omega_R,
    post_collision_omega_RS,
)

__all__ = [
    "ADAPTIVE",
    "RS_MAPPED",
    "INVARIANTS",
    "ReuseGrid",
    "SubsampledGrid",
    "QuadratureSpec",
    "McSpec",
    "McResult",
    "WeakMomentResult",
    "angular_quadrature",
    "u_axis_indices",
    "q_eval",
    "q_targets",
    "q_field",
    "q_field_array",
    "q_mc",
    "weak_moment",
    "entropy_production_mc",
]

ADAPTIVE = "Adaptive"
# R-form outcome expressed through the RS formula at the mapped direction;
# identical to OmegaR termwise while the angular cutoff is inactive.
RS_MAPPED = "OmegaRSMapped"

_REP_FLAGS = {OMEGA_R: 0, OMEGA_RS: 1, RS_MAPPED: 2, ADAPTIVE: 3}

# Collision-invariant test functions for weak_moment.
ONE, V1, V2, V3, V0 = "One", "V1", "V2", "V3", "V0"
INVARIANTS = (ONE, V1, V2, V3, V0)

_G_SKIP = 1e-14


@dataclass(frozen=True)
class ReuseGrid:
    """Integrate over u on every node of the field grid."""


@dataclass(frozen=True)
class SubsampledGrid:
    """Integrate over u on a mirror-symmetric strided subset of the grid.

    Per axis the subset walks inward from both boundary nodes with the
    given stride and always includes the innermost node pair (or center
    node), so the selection is symmetric under v -> -v and odd moments of
    symmetric integrands are not polluted by a lopsided quadrature.
    """

    stride: int = 4

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be a positive integer")


UIntegration = Union[ReuseGrid, SubsampledGrid]


@dataclass(frozen=True)
class QuadratureSpec:
    """Deterministic quadrature: angular resolution, u nodes, tail budget.

    The angular rule uses angular_nodes Gauss-Legendre nodes in cos(theta)
    crossed with angular_nodes uniform midpoints in phi (angular_nodes^2
    directions total); its weights are positive and sum to 4*pi.
    tail_rtol is the certified relative tail budget described in the
    module docstring; 0 disables tail skipping.
    """

    angular_nodes: int = 6
    u_integration: UIntegration = ReuseGrid()
    tail_rtol: float = 1e-8

    def __post_init__(self):
        if self.angular_nodes < 6:
            raise ValueError("need at least 6 angular nodes per factor")
        if not isinstance(self.u_integration, (ReuseGrid, SubsampledGrid)):
            raise ValueError("u_integration must be ReuseGrid or SubsampledGrid")
        if not self.tail_rtol >= 0.0:
            raise ValueError("tail_rtol must be nonnegative")


@dataclass(frozen=True)
class McSpec:
    """Monte Carlo sample count and RNG seed (fixed seed => fixed output)."""

    nsamples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.nsamples < 1000:
            raise ValueError("need at least 10^3 Monte Carlo samples")


@dataclass(frozen=True)
class McResult:
    estimate: float
    stderr: float


@dataclass(frozen=True)
class WeakMomentResult:
    estimate: float
    stderr: float
    # Largest |phi(v') + phi(u') - phi(v) - phi(u)| seen; for the five
    # conserved phi this is pure roundoff (<= 1e-10 by contract).
    max_bracket: float


def angular_quadrature(m: int):
    """Product rule on the sphere: (directions (m^2, 3), weights (m^2,)).

    Gauss-Legendre in mu = cos(theta) crossed with uniform midpoints in
    phi; weights are positive and sum to 4*pi within 1e-12.
    """
    mu, wmu = np.polynomial.legendre.leggauss(m)
    phi = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
    st = np.sqrt(1.0 - mu * mu)
    cphi, sphi = np.cos(phi), np.sin(phi)
    omegas = np.empty((m * m, 3))
    omegas[:, 0] = (st[:, None] * cphi[None, :]).ravel()
    omegas[:, 1] = (st[:, None] * sphi[None, :]).ravel()
    omegas[:, 2] = np.repeat(mu, m)
    weights = np.repeat(wmu * (2.0 * np.pi / m), m)
    if np.any(weights <= 0.0) or abs(weights.sum() - 4.0 * np.pi) > 1e-12:
        raise AssertionError("angular weights must be positive and sum to 4*pi")
    return omegas, weights


def u_axis_indices(n: int, u_integration: UIntegration) -> np.ndarray:
    """Per-axis node indices used for the u integral (sorted)."""
    if isinstance(u_integration, ReuseGrid):
        return np.arange(n)
    stride = u_integration.stride
    upper = set(range(n - 1, n // 2 - 1, -stride))
    upper.add(n // 2)
    idx = sorted(upper | {n - 1 - i for i in upper})
    return np.asarray(idx, dtype=np.int64)


def _axis_trapezoid(coords: np.ndarray) -> np.ndarray:
    """Trapezoid weights for sorted, possibly nonuniform 1d nodes."""
    w = np.empty_like(coords)
    w[0] = 0.5 * (coords[1] - coords[0])
    w[-1] = 0.5 * (coords[-1] - coords[-2])
    w[1:-1] = 0.5 * (coords[2:] - coords[:-2])
    return w


def _interp_overshoot(kappa: float, h: float, vmax: float) -> float:
    # Sharp bound on how far a trilinear interpolant of node values below
    # W e^{-kappa|v|^2} can exceed that envelope between nodes: per axis
    # the chord-to-function ratio is at most max_tau e^{beta tau}
    # (1 - tau(1-e^-beta)) with beta = 2 kappa h vmax, maximized in
    # closed form; the 3d factor is the cube.
    beta = 2.0 * kappa * h * vmax
    em = -math.expm1(-beta)
    tau = (1.0 - em / beta) / em
    val = math.exp(beta * tau) * em / beta
    return max(1.0, val) ** 3


@njit(cache=True, fastmath=True)
def _trilerp(vals, a0, hinv, n, x, y, z):
    tx = (x - a0) * hinv
    ty = (y - a0) * hinv
    tz = (z - a0) * hinv
    top = n - 1.0
    if tx < 0.0 or tx > top or ty < 0.0 or ty > top or tz < 0.0 or tz > top:
        return 0.0
    ix = int(tx)
    iy = int(ty)
    iz = int(tz)
    if ix > n - 2:
        ix = n - 2
    if iy > n - 2:
        iy = n - 2
    if iz > n - 2:
        iz = n - 2
    fx = tx - ix
    fy = ty - iy
    fz = tz - iz
    c00 = vals[ix, iy, iz] * (1.0 - fx) + vals[ix + 1, iy, iz] * fx
    c10 = vals[ix, iy + 1, iz] * (1.0 - fx) + vals[ix + 1, iy + 1, iz] * fx
    c01 = vals[ix, iy, iz + 1] * (1.0 - fx) + vals[ix + 1, iy, iz + 1] * fx
    c11 = vals[ix, iy + 1, iz + 1] * (1.0 - fx) + vals[ix + 1, iy + 1, iz + 1] * fx
    c0 = c00 * (1.0 - fy) + c10 * fy
    c1 = c01 * (1.0 - fy) + c11 * fy
    return c0 * (1.0 - fz) + c1 * fz


@njit(cache=True, parallel=True, fastmath=True)
def _q_kernel(vals, a0, hinv, n, targets, f_tgt, R,
              u_pts, u_w, f_u, u0_arr, eu_arr, uu2_arr, u_keep,
              omegas, aw, A, b, sigma1, Bcut, smooth, width,
              rep_flag, skip, T1, T2, rho, M2):
    nt = targets.shape[0]
    nu = u_pts.shape[0]
    nw = omegas.shape[0]
    R2 = R * R
    Rinv3 = 1.0 / (R2 * R)
    asig = A * sigma1
    gain = np.zeros(nt)
    loss = np.zeros(nt)
    for it in prange(nt):
        vx = targets[it, 0]
        vy = targets[it, 1]
        vz = targets[it, 2]
        fv = f_tgt[it]
        vt2 = vx * vx + vy * vy + vz * vz
        v0 = math.sqrt(1.0 + vt2 / R2)
        ev = math.exp(-vt2)
        if skip == 1 and rho * ev * M2 <= T2:
            continue
        gacc_t = 0.0
        lacc_t = 0.0
        for iu in range(nu):
            if skip == 1 and u_keep[iu] == 0:
                continue
            ux = u_pts[iu, 0]
            uy = u_pts[iu, 1]
            uz = u_pts[iu, 2]
            u0 = u0_arr[iu]
            dx = vx - ux
            dy = vy - uy
            dz = vz - uz
            nx = vx + ux
            ny = vy + uy
            nz = vz + uz
            n0 = v0 + u0
            dd2 = dx * dx + dy * dy + dz * dz
            dn = dx * nx + dy * ny + dz * nz
            # On-shell form of g^2 avoiding the (v0-u0)^2 cancellation.
            g2 = (dd2 - (dn * dn) / (R2 * n0 * n0)) / R2
            if g2 < _G_SKIP * _G_SKIP:
                continue
            g = math.sqrt(g2)
            s = 4.0 + g2
            sq = math.sqrt(s)
            if b == 1.0:
                soft = 1.0
            else:
                soft = g ** (1.0 - b)
            phig = (g + soft) * sq / (v0 * u0)
            uw = u_w[iu]
            if skip == 1:
                # Drop the pair if either certified bound fits the budget.
                h1 = uw * phig * eu_arr[iu]
                if h1 <= T1 or h1 * rho * ev * eu_arr[iu] <= T2:
                    continue
            nn2 = nx * nx + ny * ny + nz * nz
            cutfac = dd2 / (2.0 * R2 * s)
            use_rs = rep_flag == 1 or rep_flag == 2 or (
                rep_flag == 3 and vt2 > R2 and vt2 > 4.0 * uu2_arr[iu])
            gacc = 0.0
            lacc = 0.0
            for ia in range(nw):
                ox = omegas[ia, 0]
                oy = omegas[ia, 1]
                oz = omegas[ia, 2]
                ndw = nx * ox + ny * oy + nz * oz
                if use_rs and rep_flag != 1:
                    # Map the node to omega_hat, then use the RS formula;
                    # at n ~ 0 the map degenerates to the identity.
                    r = math.sqrt(n0 * n0 - (ndw * ndw) / R2)
                    if nn2 > 1e-24:
                        pc = (sq - n0) * ndw / nn2
                        ox = (n0 * ox + pc * nx) / r
                        oy = (n0 * oy + pc * ny) / r
                        oz = (n0 * oz + pc * nz) / r
                        ndw = sq * ndw / r
                w = 1.0
                qcut = cutfac * (nn2 - ndw * ndw)
                if smooth == 0:
                    if qcut > Bcut:
                        continue
                else:
                    t = (Bcut - qcut) / width
                    if t <= 0.0:
                        continue
                    if t < 1.0:
                        w = t * t * (3.0 - 2.0 * t)
                if use_rs:
                    v0p = 0.5 * n0 + 0.5 * g / R * ndw / sq
                    if nn2 > 1e-24:
                        pj = (n0 / sq - 1.0) * ndw / nn2
                    else:
                        pj = 0.0
                    half_rg = 0.5 * R * g
                    vpx = 0.5 * nx + half_rg * (ox + pj * nx)
                    vpy = 0.5 * ny + half_rg * (oy + pj * ny)
                    vpz = 0.5 * nz + half_rg * (oz + pj * nz)
                else:
                    r = math.sqrt(n0 * n0 - (ndw * ndw) / R2)
                    v0p = 0.5 * n0 + 0.5 * g / R * ndw / r
                    c = 0.5 * R * g * n0 / r
                    vpx = 0.5 * nx + c * ox
                    vpy = 0.5 * ny + c * oy
                    vpz = 0.5 * nz + c * oz
                f1 = _trilerp(vals, a0, hinv, n, vpx, vpy, vpz)
                f2 = _trilerp(vals, a0, hinv, n, nx - vpx, ny - vpy, nz - vpz)
                gacc += aw[ia] * w * f1 * f2
                lacc += aw[ia] * w
            base = uw * asig * phig
            gacc_t += base * gacc
            lacc_t += base * lacc * f_u[iu]
        gain[it] = Rinv3 * gacc_t
        loss[it] = Rinv3 * lacc_t * fv
    return gain, loss


def _prepare_u(grid: VGrid, values: np.ndarray, u_integration: UIntegration):
    idx = u_axis_indices(grid.n, u_integration)
    coords = grid.axis[idx]
    w1 = _axis_trapezoid(coords)
    X, Y, Z = np.meshgrid(coords, coords, coords, indexing="ij")
    u_pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    u_w = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).ravel()
    f_u = values[np.ix_(idx, idx, idx)].ravel()
    return u_pts, np.ascontiguousarray(u_w), np.ascontiguousarray(f_u)


def _tail_constants(values, grid, kernel, quad, R, u_pts, u_w, eu, nu):
    """Precompute the certified-skip thresholds; skip=0 disables them."""
    r2 = grid.squared_radius()
    absf = np.abs(values)
    W1 = float(np.max(absf * np.exp(r2)))
    if quad.tail_rtol <= 0.0 or W1 <= 0.0:
        return 0, 0.0, 0.0, 0.0, 0.0, np.ones(nu, dtype=np.int8)
    with np.errstate(over="ignore"):
        W2 = float(np.max(absf * np.exp(2.0 * r2)))
        rho = (W2 / W1) ** 2
    if not np.isfinite(rho):
        rho = 1e300
    K1 = _interp_overshoot(1.0, grid.h, grid.vmax)
    K2 = _interp_overshoot(2.0, grid.h, grid.vmax)
    eB = math.exp(min(kernel.B, 600.0))
    c1 = K1 + K1 * K1 * eB
    c2 = K2 + K2 * K2 * eB * eB
    denom = nu * 4.0 * np.pi * kernel.A * kernel.sigma1
    T1 = quad.tail_rtol / (denom * c1)
    T2 = quad.tail_rtol / (denom * c2)
    # Cheap per-u prefilter: for b <= 1 the pair factor
    # (g + g^(1-b)) sqrt(4+g^2) grows with g, and g <= (|u| + sqrt(3) vmax)/R
    # over the whole cube, so one upper bound per u node covers every target.
    if kernel.b <= 1.0:
        ghat = (np.linalg.norm(u_pts, axis=1) + math.sqrt(3.0) * grid.vmax) / R
        phihat = (ghat + ghat ** (1.0 - kernel.b)) * np.sqrt(4.0 + ghat * ghat)
        u_keep = (u_w * phihat * eu > T1).astype(np.int8)
        M2 = float(np.max(u_w * phihat * eu * eu))
    else:
        u_keep = np.ones(nu, dtype=np.int8)
        M2 = math.inf
    return 1, T1, T2, rho, M2, u_keep


def _q_raw(values, grid, targets, f_tgt, R, kernel, quad, rep, split):
    flag = _REP_FLAGS[rep]
    targets = np.ascontiguousarray(np.asarray(targets, dtype=float).reshape(-1, 3))
    f_tgt = np.ascontiguousarray(np.asarray(f_tgt, dtype=float).ravel())
    if np.all(values == 0.0):
        z = np.zeros(targets.shape[0])
        return (z, z.copy()) if split else z
    omegas, aw = angular_quadrature(quad.angular_nodes)
    m = quad.angular_nodes
    if m % 2 == 0:
        # Antipodal fold: omega -> -omega swaps v' and u', so the product
        # f(v')f(u') and the cutoff weight (a function of (n.omega)^2) are
        # even, and for even m the product rule maps nodes to nodes (the
        # Gauss-Legendre mu nodes negate pairwise, phi midpoints shift by
        # pi).  Keeping the mu < 0 half with doubled weights is exact.
        omegas = np.ascontiguousarray(omegas.reshape(m, m, 3)[: m // 2]
                                      .reshape(-1, 3))
        aw = 2.0 * aw[: (m // 2) * m]
    u_pts, u_w, f_u = _prepare_u(grid, values, quad.u_integration)
    nu = u_pts.shape[0]
    u0_arr = lift(u_pts, R)
    uu2_arr = np.einsum("ij,ij->i", u_pts, u_pts)
    eu_arr = np.exp(-uu2_arr)
    skip, T1, T2, rho, M2, u_keep = _tail_constants(
        values, grid, kernel, quad, R, u_pts, u_w, eu_arr, nu)
    smooth = 0 if kernel.angular_mode == SHARP else 1
    gain, loss = _q_kernel(
        np.ascontiguousarray(values), -grid.vmax, 1.0 / grid.h, grid.n,
        targets, f_tgt, float(R),
        u_pts, u_w, f_u, u0_arr, eu_arr, uu2_arr, u_keep,
        omegas, aw, kernel.A, kernel.b, kernel.sigma1, kernel.B,
        smooth, kernel.smooth_width,
        flag, skip, T1, T2, rho, M2)
    return (gain, loss) if split else gain - loss


def q_targets(field: DistributionField, targets, t, cosmo, kernel: KernelParams,
              quad: QuadratureSpec, rep: str = OMEGA_R, split: bool = False):
    """Deterministic Q(f,f) at arbitrary target momenta, shape (nt,)."""
    R = float(cosmo.R(t))
    f_tgt = interpolate(field, np.asarray(targets, dtype=float).reshape(-1, 3))
    return _q_raw(field.values, field.grid, targets, f_tgt, R, kernel, quad,
                  rep, split)


def q_eval(field: DistributionField, v, t, cosmo, kernel: KernelParams,
           quad: QuadratureSpec, rep: str = OMEGA_R) -> float:
    """Deterministic Q(f,f) at a single momentum v."""
    return float(q_targets(field, np.asarray(v, dtype=float).reshape(1, 3),
                           t, cosmo, kernel, quad, rep)[0])


def q_field_array(values: np.ndarray, grid: VGrid, t, cosmo,
                  kernel: KernelParams, quad: QuadratureSpec,
                  rep: str = OMEGA_R, split: bool = False):
    """Q at every grid node for a raw value array (used by solver stages,
    whose intermediate states may carry small negative undershoots)."""
    R = float(cosmo.R(t))
    values = np.asarray(values, dtype=float)
    out = _q_raw(values, grid, grid.node_coords(), values.ravel(), R, kernel,
                 quad, rep, split)
    shape = (grid.n,) * 3
    if split:
        return out[0].reshape(shape), out[1].reshape(shape)
    return out.reshape(shape)


def q_field(field: DistributionField, t, cosmo, kernel: KernelParams,
            quad: QuadratureSpec, rep: str = OMEGA_R, split: bool = False):
    """Q(f,f) at every grid node; parallel over nodes, bit-reproducible."""
    return q_field_array(field.values, field.grid, t, cosmo, kernel, quad,
                         rep, split)


# ---------------------------------------------------------------------------
# Monte Carlo oracles


def _sample_sphere(rng, m):
    z = rng.uniform(-1.0, 1.0, m)
    phi = rng.uniform(0.0, 2.0 * np.pi, m)
    st = np.sqrt(1.0 - z * z)
    return np.stack([st * np.cos(phi), st * np.sin(phi), z], axis=1)


def _pair_outcomes(v, u, node, R, kernel, rep):
    """Post-collision pair, cutoff weight and v_phi*sigma for sampled
    (v, u, node) triples; `node` is omega for the R form and omega_hat for
    the RS form."""
    sc = collision_scalars(v, u, R)
    if rep == OMEGA_R:
        out = post_collision_omega_R(v, u, node, R)
        q = cutoff_quantity(v, u, node, R)
    elif rep == OMEGA_RS:
        out = post_collision_omega_RS(v, u, node, R)
        q = cutoff_quantity(v, u, node, R)
    elif rep == RS_MAPPED:
        oh = omega_hat_from_omega(v, u, node, R)
        out = post_collision_omega_RS(v, u, oh, R)
        q = cutoff_quantity(v, u, oh, R)
    elif rep == ADAPTIVE:
        out_r = post_collision_omega_R(v, u, node, R)
        q_r = cutoff_quantity(v, u, node, R)
        oh = omega_hat_from_omega(v, u, node, R)
        out_s = post_collision_omega_RS(v, u, oh, R)
        q_s = cutoff_quantity(v, u, oh, R)
        vv = np.einsum("...i,...i->...", v, v)
        uu = np.einsum("...i,...i->...", u, u)
        rs = (vv > R * R) & (vv > 4.0 * uu)
        m = rs[..., None]
        out = CollisionOutcome(
            v_prime=np.where(m, out_s.v_prime, out_r.v_prime),
            u_prime=np.where(m, out_s.u_prime, out_r.u_prime),
            v0_prime=np.where(rs, out_s.v0_prime, out_r.v0_prime),
            u0_prime=np.where(rs, out_s.u0_prime, out_r.u0_prime),
            representation=ADAPTIVE,
        )
        q = np.where(rs, q_s, q_r)
    else:
        raise ValueError(f"unknown representation {rep!r}")
    w = cutoff_weight(kernel, q)
    vps = vphi_sigma(kernel, sc, w)
    # g ~ 0 means v' = v, u' = u: the bracket vanishes identically, so the
    # term is dropped rather than evaluated as 0 * inf.
    vps = np.where(sc.g < _G_SKIP, 0.0, vps)
    return out, vps


def q_mc(field: DistributionField, v, t, cosmo, kernel: KernelParams,
         mc: McSpec, rep: str = OMEGA_R) -> McResult:
    """Monte Carlo estimate of Q(f,f)(v): u ~ exp(-|u|^2) importance
    sampled (weight pi^{3/2} e^{|u|^2}), directions uniform (weight 4 pi)."""
    R = float(cosmo.R(t))
    rng = np.random.default_rng(mc.seed)
    m = mc.nsamples
    v = np.asarray(v, dtype=float)
    u = rng.standard_normal((m, 3)) / math.sqrt(2.0)
    node = _sample_sphere(rng, m)
    out, vps = _pair_outcomes(np.broadcast_to(v, (m, 3)), u, node, R, kernel, rep)
    fv = interpolate(field, v)
    fu = interpolate(field, u)
    f1 = interpolate(field, out.v_prime)
    f2 = interpolate(field, out.u_prime)
    uu = np.einsum("ij,ij->i", u, u)
    w_imp = np.pi ** 1.5 * np.exp(uu) * 4.0 * np.pi
    terms = vps * (f1 * f2 - fv * fu) * w_imp / R ** 3
    est = float(np.mean(terms))
    err = float(np.std(terms, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return McResult(estimate=est, stderr=err)


def _phi_values(phi, w, w0):
    if phi == ONE:
        return np.ones_like(w0)
    if phi == V0:
        return w0
    try:
        k = (V1, V2, V3).index(phi)
    except ValueError:
        raise ValueError(f"unknown invariant {phi!r}") from None
    return w[..., k]


def weak_moment(field: DistributionField, phi: str, t, cosmo,
                kernel: KernelParams, mc: McSpec,
                rep: str = OMEGA_R) -> WeakMomentResult:
    """Symmetrized MC estimate of the weak integral of Q against phi.

    Exchanging pre and post momenta in the gain term and relabeling the
    pair collapses the weak form to

        (1/2) < v_phi sigma f(v) f(u) [phi(v')+phi(u')-phi(v)-phi(u)] >,

    so for the five conserved phi every sampled term cancels to roundoff
    (u' = n - v' and u'0 = n0 - v'0 by construction) and the estimate is
    an exact zero rather than a small statistical one.
    """
    R = float(cosmo.R(t))
    rng = np.random.default_rng(mc.seed)
    m = mc.nsamples
    v = rng.standard_normal((m, 3)) / math.sqrt(2.0)
    u = rng.standard_normal((m, 3)) / math.sqrt(2.0)
    node = _sample_sphere(rng, m)
    out, vps = _pair_outcomes(v, u, node, R, kernel, rep)
    v0 = lift(v, R)
    u0 = lift(u, R)
    bracket = (_phi_values(phi, out.v_prime, out.v0_prime)
               + _phi_values(phi, out.u_prime, out.u0_prime)
               - _phi_values(phi, v, v0) - _phi_values(phi, u, u0))
    fv = interpolate(field, v)
    fu = interpolate(field, u)
    vv = np.einsum("ij,ij->i", v, v)
    uu = np.einsum("ij,ij->i", u, u)
    w_imp = np.pi ** 3 * np.exp(vv + uu) * 4.0 * np.pi
    terms = 0.5 * vps * fv * fu * bracket * w_imp / R ** 3
    est = float(np.mean(terms))
    err = float(np.std(terms, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    active = vps > 0.0
    max_bracket = float(np.max(np.abs(bracket[active]), initial=0.0))
    return WeakMomentResult(estimate=est, stderr=err, max_bracket=max_bracket)


def entropy_production_mc(field: DistributionField, t, cosmo,
                          kernel: KernelParams, mc: McSpec,
                          rep: str = OMEGA_R) -> McResult:
    """Fully symmetrized MC estimate of -d/dt integral f log f, i.e.

        (1/4) < v_phi sigma (f'f*' - ff*) (log f'f*' - log ff*) >  >=  0

    termwise, since both factors share a sign.  Samples where any of the
    four f values vanish (post-collisional points outside the cube, or
    zeros of f itself) are dropped: on a strictly positive field they are
    pure truncation boundary and carry no interior information.
    """
    R = float(cosmo.R(t))
    rng = np.random.default_rng(mc.seed)
    m = mc.nsamples
    v = rng.standard_normal((m, 3)) / math.sqrt(2.0)
    u = rng.standard_normal((m, 3)) / math.sqrt(2.0)
    node = _sample_sphere(rng, m)
    out, vps = _pair_outcomes(v, u, node, R, kernel, rep)
    pre = interpolate(field, v) * interpolate(field, u)
    post = interpolate(field, out.v_prime) * interpolate(field, out.u_prime)
    vv = np.einsum("ij,ij->i", v, v)
    uu = np.einsum("ij,ij->i", u, u)
    w_imp = np.pi ** 3 * np.exp(vv + uu) * 4.0 * np.pi
    valid = (pre > 0.0) & (post > 0.0) & (vps > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        prod = np.where(valid,
                        (post - pre) * (np.log(np.where(valid, post, 1.0))
                                        - np.log(np.where(valid, pre, 1.0))),
                        0.0)
    terms = 0.25 * vps * prod * w_imp / R ** 3
    est = float(np.mean(terms))
    err = float(np.std(terms, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return McResult(estimate=est, stderr=err)
