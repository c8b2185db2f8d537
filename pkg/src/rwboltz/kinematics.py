"""Exact binary-collision kinematics in the transformed momentum variable.

Everything here works with the covariant momentum v = R^2 p of a unit-mass
particle in a flat expanding spacetime with scale factor R(t), so that the
particle energy reads v0 = sqrt(1 + |v|^2/R^2).  For a colliding pair (v, u)
the Lorentz scalars are

    g^2 = -(v0 - u0)^2 + |v - u|^2 / R^2,        s = 4 + g^2,

and the Moller-type flux factor is v_phi = g sqrt(s) / (v0 u0).

Two parametrizations of the post-collisional momenta are provided, called
the R form (parametrized by a unit vector omega) and the RS form
(parametrized by a unit vector omega_hat).  With n = v + u, n0 = v0 + u0
and r = sqrt(n0^2 - (n.omega)^2/R^2):

    R form:   v'0 = n0/2 + (g/2R) (n.omega) / r
              v'  = n/2  + (Rg/2) n0 omega / r

    RS form:  v'0 = n0/2 + (g/2R) (n.omega_hat) / sqrt(s)
              v'  = n/2  + (Rg/2) [omega_hat - Pn + (n0/sqrt(s)) Pn],
              Pn  = (n.omega_hat) n / |n|^2.

In both forms u' = n - v' and u'0 = n0 - v'0, so total momentum and energy
are conserved identically.  The two forms describe the same collision when
omega and omega_hat are related by ``omega_hat_from_omega``.

All functions are vectorized: momenta have shape (..., 3), omega likewise,
and R may be a scalar or any array broadcastable against the batch shape.
Every function is pure, so concurrent use needs no locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "OMEGA_R",
    "OMEGA_RS",
    "CollisionScalars",
    "CollisionOutcome",
    "KinematicsError",
    "lift",
    "collision_scalars",
    "post_collision_omega_R",
    "post_collision_omega_RS",
    "omega_hat_from_omega",
    "newtonian_post_collision",
    "energy_defect",
    "cutoff_quantity",
    "cutoff_contains",
]

OMEGA_R = "OmegaR"
OMEGA_RS = "OmegaRS"

# Roundoff tolerances of the public contracts.
G2_CLAMP = 1e-12            # g^2 in [-G2_CLAMP, 0) is clamped to 0
UNIT_TOL = 1e-12            # |omega| must equal 1 within this
N_SMALL = 1e-12             # |n| below this: RS projection terms vanish


class KinematicsError(RuntimeError):
    """Internal-consistency failure that should be impossible on-shell.

    Raised when g^2 falls below -1e-12 (the defining quadratic form went
    substantially negative) or when the R-form direction denominator
    degenerates.  Either signals a formula bug, not bad user input.
    """


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _check_R(R):
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0.0):
        raise ValueError("scale factor R must be strictly positive")
    return R


def _check_unit(omega):
    omega = np.asarray(omega, dtype=float)
    if omega.shape[-1] != 3:
        raise ValueError("unit vectors must have shape (..., 3)")
    err = np.abs(np.sqrt(_dot(omega, omega)) - 1.0)
    if np.any(err > UNIT_TOL):
        raise ValueError(f"|omega| deviates from 1 by {float(np.max(err)):.3e}")
    return omega


@dataclass(frozen=True)
class CollisionScalars:
    """Lorentz scalars of a colliding pair at a given scale factor.

    Fields are scalars or arrays sharing one batch shape: the energies
    v0, u0 >= 1, the relative momentum g >= 0, the total energy square
    s = 4 + g^2 and the flux factor v_phi = g sqrt(s)/(v0 u0).
    """

    v0: np.ndarray
    u0: np.ndarray
    g: np.ndarray
    s: np.ndarray
    v_phi: np.ndarray


@dataclass(frozen=True)
class CollisionOutcome:
    """Post-collisional pair (v', u') with energies and the form used."""

    v_prime: np.ndarray
    u_prime: np.ndarray
    v0_prime: np.ndarray
    u0_prime: np.ndarray
    representation: str


def lift(v, R):
    """Energy v0 = sqrt(1 + |v|^2/R^2) of the transformed momentum v."""
    R = _check_R(R)
    v = np.asarray(v, dtype=float)
    return np.sqrt(1.0 + _dot(v, v) / (R * R))


def _clamp_g2(g2):
    """Clamp tiny negative g^2 to zero; raise if substantially negative."""
    g2 = np.asarray(g2)
    low = np.min(g2) if g2.size else 0.0
    if low < -G2_CLAMP:
        raise KinematicsError(
            f"g^2 = {float(low):.6e} below the -1e-12 roundoff floor; "
            "the quadratic form should be nonnegative on-shell"
        )
    return np.where(g2 < 0.0, 0.0, g2)


def _g2_onshell(v, u, v0, u0, R):
    # Defining form -(v0-u0)^2 + |v-u|^2/R^2 with the energy difference
    # rewritten as v0-u0 = (v-u).(v+u)/(R^2 n0), which is exact on-shell
    # and avoids the catastrophic cancellation the naive difference has
    # at large |v|.
    d = v - u
    n0 = v0 + u0
    dn = _dot(d, v + u)
    R2 = R * R
    return (_dot(d, d) - (dn * dn) / (R2 * n0 * n0)) / R2


def collision_scalars(v, u, R):
    """Scalars (v0, u0, g, s, v_phi) of the pair (v, u) at scale factor R.

    g is computed from the defining quadratic form
    g^2 = -(v0-u0)^2 + |v-u|^2/R^2; values within -1e-12 of zero are
    clamped to 0 (roundoff at v ~ u) and anything lower raises
    KinematicsError.
    """
    R = _check_R(R)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    v0 = lift(v, R)
    u0 = lift(u, R)
    g2 = _clamp_g2(_g2_onshell(v, u, v0, u0, R))
    g = np.sqrt(g2)
    s = 4.0 + g2
    v_phi = g * np.sqrt(s) / (v0 * u0)
    return CollisionScalars(v0=v0, u0=u0, g=g, s=s, v_phi=v_phi)


def post_collision_omega_R(v, u, omega, R):
    """Post-collisional pair in the R form for scattering direction omega."""
    R = _check_R(R)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    omega = _check_unit(omega)
    sc = collision_scalars(v, u, R)
    n = v + u
    n0 = sc.v0 + sc.u0
    ndw = _dot(n, omega)
    r2 = n0 * n0 - (ndw * ndw) / (R * R)
    if np.any(r2 <= 0.0):
        # r^2 >= s >= 4 on-shell, so this cannot happen for valid inputs.
        raise KinematicsError("degenerate direction denominator r^2 <= 0")
    r = np.sqrt(r2)
    v0p = 0.5 * n0 + 0.5 * sc.g / R * ndw / r
    vp = 0.5 * n + (0.5 * R * sc.g * n0 / r)[..., None] * omega
    return CollisionOutcome(
        v_prime=vp,
        u_prime=n - vp,
        v0_prime=v0p,
        u0_prime=n0 - v0p,
        representation=OMEGA_R,
    )


def post_collision_omega_RS(v, u, omega_hat, R):
    """Post-collisional pair in the RS form for direction omega_hat.

    When |n| < 1e-12 the projection terms (n.omega_hat) n / |n|^2 are set
    to zero, which is the analytic limit: n.omega_hat -> 0 as n -> 0.
    """
    R = _check_R(R)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    omega_hat = _check_unit(omega_hat)
    sc = collision_scalars(v, u, R)
    n = v + u
    n0 = sc.v0 + sc.u0
    sqrt_s = np.sqrt(sc.s)
    ndw = _dot(n, omega_hat)
    nn2 = _dot(n, n)
    small = nn2 < N_SMALL * N_SMALL
    denom = np.where(small, 1.0, nn2)
    proj = np.where(small[..., None], 0.0, (ndw / denom)[..., None] * n)
    v0p = 0.5 * n0 + 0.5 * sc.g / R * ndw / sqrt_s
    shift = omega_hat - proj + (n0 / sqrt_s)[..., None] * proj
    vp = 0.5 * n + (0.5 * R * sc.g)[..., None] * shift
    return CollisionOutcome(
        v_prime=vp,
        u_prime=n - vp,
        v0_prime=v0p,
        u0_prime=n0 - v0p,
        representation=OMEGA_RS,
    )


def omega_hat_from_omega(v, u, omega, R):
    """Direction omega_hat for which the RS form reproduces the R form.

        omega_hat = [n0 omega + (sqrt(s) - n0) (n.omega) n / |n|^2] / r

    The output is a unit vector (an algebraic identity, holding to
    roundoff), n.omega and n.omega_hat share their sign, and
    |n.omega_hat| <= |n.omega|.  For |n| < 1e-12 the relation degenerates
    to the identity and omega is returned unchanged.
    """
    R = _check_R(R)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    omega = _check_unit(omega)
    sc = collision_scalars(v, u, R)
    n = v + u
    n0 = sc.v0 + sc.u0
    ndw = _dot(n, omega)
    r = np.sqrt(n0 * n0 - (ndw * ndw) / (R * R))
    nn2 = _dot(n, n)
    small = nn2 < N_SMALL * N_SMALL
    denom = np.where(small, 1.0, nn2)
    coeff = (np.sqrt(sc.s) - n0) * ndw / denom
    omega_hat = (n0[..., None] * omega + coeff[..., None] * n) / r[..., None]
    return np.where(small[..., None], omega, omega_hat)


def newtonian_post_collision(v, u, omega):
    """Elastic post-collisional pair of the nonrelativistic limit.

    v' = (v+u)/2 + (|v-u|/2) omega and u' = (v+u)/2 - (|v-u|/2) omega,
    which conserve |v|^2 + |u|^2 exactly.  The R form converges to this
    map as R grows.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    omega = _check_unit(omega)
    center = 0.5 * (v + u)
    radius = 0.5 * np.sqrt(_dot(v - u, v - u))
    return center + radius[..., None] * omega, center - radius[..., None] * omega


def energy_defect(v, u, omega, R, rep=OMEGA_R):
    """Defect |v|^2 + |u|^2 - |v'|^2 - |u'|^2 of the Newtonian invariant.

    Equals 2 R^2 (v'0 u'0 - v0 u0) up to roundoff and is bounded by the
    cutoff constant B whenever the scattering direction lies in the
    cutoff set (see ``cutoff_contains``).
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if rep == OMEGA_R:
        out = post_collision_omega_R(v, u, omega, R)
    elif rep == OMEGA_RS:
        out = post_collision_omega_RS(v, u, omega, R)
    else:
        raise ValueError(f"unknown representation {rep!r}")
    before = _dot(v, v) + _dot(u, u)
    after = _dot(out.v_prime, out.v_prime) + _dot(out.u_prime, out.u_prime)
    return before - after


def cutoff_quantity(v, u, omega, R):
    """The angular cutoff quantity |v-u|^2 |n x omega|^2 / (2 R^2 s)."""
    R = _check_R(R)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    omega = _check_unit(omega)
    sc = collision_scalars(v, u, R)
    n = v + u
    cross = np.cross(n, omega)
    d = v - u
    return _dot(d, d) * _dot(cross, cross) / (2.0 * R * R * sc.s)


def cutoff_contains(v, u, omega, R, B):
    """Whether omega lies in the cutoff set for the pair (v, u).

    The set grows with R; for fixed (v, u, omega) it contains omega for
    every R beyond a finite threshold, so the angular restriction
    disappears in the late-time limit.
    """
    if np.any(np.asarray(B) <= 0.0):
        raise ValueError("cutoff constant B must be positive")
    return cutoff_quantity(v, u, omega, R) <= B
