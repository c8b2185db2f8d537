"""Soft-potential scattering kernels with an angular cutoff.

The admissible kernel class is

    0 <= sigma(g, omega) <= A (1 + g^-b) sigma0(omega),
    |d sigma / d g|      <= A' g^(-b-1)   sigma0(omega),

with amplitude A > 0, soft-potential exponent 0 <= b < 3 and an angular
part 0 <= sigma0 <= sigma1 supported in the cutoff set where
|v-u|^2 |n x omega|^2 / (2 R^2 s) <= B.  The shipped reference kernel is

    sigma = A (1 + g^-b) sigma1 w(omega),

where w is either the sharp indicator of the cutoff set or a smooth ramp
that falls from 1 to 0 over the last `width` of the cutoff quantity's
admissible range, so its support always stays inside the sharp set and the
class bounds continue to hold.  The derivative bound then holds with the
class constant A' = A max(1, b).

Evaluating sigma alone at g = 0 with b > 0 diverges; the collision
integrand is finite because sigma always appears premultiplied by the flux
factor v_phi, and ``vphi_sigma`` evaluates that product in the single
factor (g + g^(1-b)) sqrt(s) / (v0 u0) to avoid the 0 * inf form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import CollisionScalars
from .reports import CheckReport

__all__ = [
    "SHARP",
    "SMOOTH",
    "KernelParams",
    "cutoff_weight",
    "sigma",
    "dsigma_dg",
    "vphi_sigma",
    "validate_class",
]

SHARP = "sharp"
SMOOTH = "smooth"


@dataclass(frozen=True)
class KernelParams:
    """Constants (A, b, sigma1, B) of the kernel class plus cutoff mode."""

    A: float = 1.0
    b: float = 1.0
    sigma1: float = 1.0
    B: float = 1.0
    angular_mode: str = SHARP
    smooth_width: float = 0.25

    def __post_init__(self):
        if not self.A > 0.0:
            raise ValueError("amplitude A must be positive")
        if not 0.0 <= self.b < 3.0:
            raise ValueError("soft-potential exponent b must lie in [0, 3)")
        if not self.sigma1 > 0.0:
            raise ValueError("angular bound sigma1 must be positive")
        if not self.B > 0.0:
            raise ValueError("cutoff constant B must be positive")
        if self.angular_mode not in (SHARP, SMOOTH):
            raise ValueError(f"unknown angular mode {self.angular_mode!r}")
        if self.angular_mode == SMOOTH and not self.smooth_width > 0.0:
            raise ValueError("smooth cutoff width must be positive")

    @property
    def class_constant(self) -> float:
        """A' = A max(1, b), the constant of the derivative bound."""
        return self.A * max(1.0, self.b)


def cutoff_weight(params: KernelParams, quantity):
    """Angular weight w in [0, 1] as a function of the cutoff quantity.

    Sharp mode returns the indicator of quantity <= B.  Smooth mode ramps
    from 1 at quantity <= B - width down to 0 at quantity >= B with a
    cubic smoothstep, keeping the support inside the sharp set.
    """
    q = np.asarray(quantity, dtype=float)
    if params.angular_mode == SHARP:
        return (q <= params.B).astype(float)
    t = np.clip((params.B - q) / params.smooth_width, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def sigma(params: KernelParams, g, weight):
    """Reference kernel A (1 + g^-b) sigma1 * weight.

    Returns +inf where g = 0 with b > 0 and weight > 0; callers that
    integrate must use ``vphi_sigma`` instead.
    """
    g = np.asarray(g, dtype=float)
    if np.any(g < 0.0):
        raise ValueError("g must be nonnegative")
    w = np.asarray(weight, dtype=float)
    with np.errstate(divide="ignore"):
        tail = np.where(g > 0.0, g ** (-params.b), np.inf if params.b > 0.0 else 1.0)
    val = params.A * (1.0 + tail) * params.sigma1
    return np.where(w > 0.0, val * w, 0.0)


def dsigma_dg(params: KernelParams, g, weight):
    """Derivative in g of the reference kernel, -A b g^(-b-1) sigma1 w."""
    g = np.asarray(g, dtype=float)
    if np.any(g <= 0.0):
        raise ValueError("g must be positive for the derivative")
    w = np.asarray(weight, dtype=float)
    return -params.A * params.b * g ** (-params.b - 1.0) * params.sigma1 * w


def vphi_sigma(params: KernelParams, scalars: CollisionScalars, weight):
    """The finite product v_phi * sigma = A sigma1 w (g + g^(1-b)) sqrt(s)/(v0 u0).

    This is the only form in which the kernel enters the collision
    integral; for b <= 1 it vanishes continuously as g -> 0, and for
    b > 1 its g^(1-b) singularity is integrable against the u measure.
    """
    g = np.asarray(scalars.g, dtype=float)
    w = np.asarray(weight, dtype=float)
    with np.errstate(divide="ignore"):
        if params.b == 1.0:
            soft = np.ones_like(g)
        else:
            soft = np.where(g > 0.0, g ** (1.0 - params.b), np.inf if params.b > 1.0 else 0.0)
    amp = params.A * params.sigma1 * np.sqrt(scalars.s) / (scalars.v0 * scalars.u0)
    val = amp * (g + soft)
    return np.where(w > 0.0, val * w, 0.0)


def validate_class(params: KernelParams, nsamples: int = 100_000, seed: int = 0,
                   sigma_fn=None, dsigma_fn=None) -> CheckReport:
    """Check the class bounds for the reference kernel by sampling.

    Samples g log-uniform over (1e-6, 1e3) crossed with a grid of angular
    weights in [0, 1] and asserts, with relative slack 1e-9,

        0 <= sigma <= A (1 + g^-b) sigma1 w,
        |d sigma / d g| <= A max(1, b) g^(-b-1) sigma1 w.

    sigma_fn / dsigma_fn override the evaluated kernel (used by mutation
    tests to confirm the check can fail).
    """
    rng = np.random.default_rng(seed)
    sigma_fn = sigma_fn or sigma
    dsigma_fn = dsigma_fn or dsigma_dg
    weights = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    per = max(1, nsamples // weights.size)
    slack = 1e-9
    violations = 0
    max_slack = -np.inf
    worst = {}
    total = 0
    for w in weights:
        g = np.exp(rng.uniform(np.log(1e-6), np.log(1e3), size=per))
        total += g.size
        sig = np.asarray(sigma_fn(params, g, w), dtype=float)
        bound = params.A * (1.0 + g ** (-params.b)) * params.sigma1 * w
        dsig = np.abs(np.asarray(dsigma_fn(params, g, w), dtype=float))
        dbound = params.class_constant * g ** (-params.b - 1.0) * params.sigma1 * w
        # Signed slack: positive once a bound is exceeded beyond roundoff.
        s1 = (sig - bound) / np.maximum(bound, 1e-300) - slack
        s2 = np.where(sig < 0.0, -sig, -slack)
        s3 = (dsig - dbound) / np.maximum(dbound, 1e-300) - slack
        for name, arr in (("upper", s1), ("nonneg", s2), ("derivative", s3)):
            bad = int(np.count_nonzero(arr > 0.0))
            violations += bad
            i = int(np.argmax(arr))
            if arr[i] > max_slack:
                max_slack = float(arr[i])
                worst = {"bound": name, "g": float(g[i]), "weight": float(w)}
    return CheckReport(
        lemma_id="kernel_class",
        samples_run=total,
        violations=violations,
        max_slack=max_slack,
        worst_case=worst,
        details={"class_constant": params.class_constant},
    )
