"""Certification suites: reduced-sample runs of every suite, negative
controls that must flag violations, hand checks of the closed-form
derivatives, and the report container's contracts.

Acceptance-size runs live in test_acceptance; here every suite runs at a
few thousand samples so the whole file stays in the seconds range.
"""

import json

import numpy as np
import pytest

from rwboltz.estimates import (
    NearSingularInputError,
    analytic_derivatives,
    run_suite,
    verify_derivatives,
    verify_inequalities,
    verify_integral_bounds,
    verify_jacobian_bounds,
    verify_sigma_integral,
    SUITES,
)
from rwboltz.reports import CheckReport


def _v0(v, R):
    return np.sqrt(1.0 + v @ v / R ** 2)


def _g(v, u, R):
    return np.sqrt(-(_v0(v, R) - _v0(u, R)) ** 2 + (v - u) @ (v - u) / R ** 2)


def _r(v, u, omega, R):
    n = v + u
    n0 = _v0(v, R) + _v0(u, R)
    return np.sqrt(n0 ** 2 - (n @ omega) ** 2 / R ** 2)


def _proj(v, u, omega):
    n = v + u
    return (n @ omega) * n / (n @ n)


def _fd_grad(fn, v, h=1e-6):
    out = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        out[i] = (fn(v + e) - fn(v - e)) / (2.0 * h)
    return out


# ---------------------------------------------------------------------------
# sampled inequality suites at reduced size


@pytest.mark.parametrize("suite,n", [("L2_1", 20_000), ("L3_1", 20_000),
                                     ("omega", 20_000), ("L2_2", 2_000)])
def test_suite_passes_reduced(suite, n):
    for r in run_suite(suite, samples=n, seed=0):
        assert r.passed, (r.lemma_id, r.max_slack, r.worst_case)
        # positive slack below the 1e-9 roundoff allowance still passes
        assert r.max_slack <= 1e-9
        # chunking may drop a few near-singular samples from the tally
        assert r.samples_run >= 0.9 * n


def test_suite_deterministic_for_seed():
    a = run_suite("L2_1", samples=5_000, seed=7)[0]
    b = run_suite("L2_1", samples=5_000, seed=7)[0]
    c = run_suite("L2_1", samples=5_000, seed=8)[0]
    assert a.max_slack == b.max_slack
    assert a.worst_case == b.worst_case
    assert c.max_slack != a.max_slack


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite("L9_9")
    assert "all" not in SUITES  # 'all' is the driver's alias, not a suite


def test_defect_bound_negative_control():
    # B = 0 collapses the cutoff set to its boundary, where the defect
    # equality makes the strict bound fail; the check must say so
    r = verify_inequalities("L3_1", 20_000, 0, B_list=(0.0,))
    assert r.violations > 0
    assert not r.passed
    assert r.max_slack > 0.0


# ---------------------------------------------------------------------------
# quadrature suites


def test_constant_alpha_zero_is_gaussian_mass():
    r = verify_integral_bounds("L2_3", alpha=0.0, resolution=32)
    assert r.passed
    assert r.details["C_alpha"] == pytest.approx(np.pi ** 1.5, rel=2e-3)


def test_integral_alpha_one_closed_form():
    # the u-integral of |v-u|^(-1) e^{-|u|^2} is pi^(3/2) erf(a)/a at
    # |v| = a, which pins both the normalization and the a-dependence
    from scipy.special import erf
    from rwboltz.estimates import _integral_alpha
    for a in (0.5, 1.0, 2.5):
        assert _integral_alpha(1.0, a, 64) == pytest.approx(
            np.pi ** 1.5 * erf(a) / a, rel=1e-12)


def test_l2_3_rejects_bad_alpha():
    for alpha in (-0.5, 3.0, None):
        with pytest.raises(ValueError):
            verify_integral_bounds("L2_3", alpha=alpha)
    with pytest.raises(ValueError):
        verify_integral_bounds("L9", alpha=1.0)


@pytest.mark.parametrize("beta,expo", [(2.0, 1.0), (3.0, 2.0)])
def test_growth_exponent_tracks_beta(beta, expo):
    r = verify_integral_bounds("L3_3", beta=beta, resolution=24)
    assert r.passed
    assert abs(r.details["fitted_exponent"] - expo) <= 0.15


@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_flat_envelope_below_beta_one(beta):
    r = verify_integral_bounds("L3_3", beta=beta, resolution=24)
    assert r.passed
    assert abs(r.details["envelope_exponent"]) <= 0.1


def test_l3_3_rejects_bad_beta():
    with pytest.raises(ValueError):
        verify_integral_bounds("L3_3", beta=4.0)


def test_angular_kernel_integral_bounded():
    r = verify_sigma_integral(n_u=17, n_angle=8)
    assert r.passed
    assert r.details["bound"] == pytest.approx(4.0 * np.pi * np.pi ** 1.5)


# ---------------------------------------------------------------------------
# closed-form derivatives: hand check plus FD suite


def test_analytic_derivatives_match_fd():
    rng = np.random.default_rng(5)
    for R in (1.0, 10.0):
        v = rng.normal(size=3)
        u = rng.normal(size=3) + 0.5
        omega = rng.normal(size=3)
        omega /= np.linalg.norm(omega)
        d = analytic_derivatives(v, u, omega, R)
        np.testing.assert_allclose(d.d_v0, _fd_grad(lambda x: _v0(x, R), v),
                                   rtol=1e-5)
        np.testing.assert_allclose(d.d_g, _fd_grad(lambda x: _g(x, u, R), v),
                                   rtol=1e-5)
        np.testing.assert_allclose(
            d.d_sqrt_s,
            _fd_grad(lambda x: np.sqrt(4.0 + _g(x, u, R) ** 2), v), rtol=1e-5)
        np.testing.assert_allclose(d.d_r,
                                   _fd_grad(lambda x: _r(x, u, omega, R), v),
                                   rtol=1e-5)
        fd_proj = np.stack([_fd_grad(lambda x: _proj(x, u, omega)[k], v)
                            for k in range(3)], axis=1)
        np.testing.assert_allclose(d.d_projection, fd_proj, rtol=1e-5,
                                   atol=1e-8)


def test_near_singular_inputs_refused():
    v = np.array([0.3, -0.2, 0.7])
    omega = np.array([1.0, 0.0, 0.0])
    with pytest.raises(NearSingularInputError):
        analytic_derivatives(v, v, omega, 1.0)          # g = 0
    with pytest.raises(NearSingularInputError):
        analytic_derivatives(v, -v, omega, 1.0)         # n = 0
    assert issubclass(NearSingularInputError, ValueError)


def test_derivative_suite_reduced():
    r = verify_derivatives(nsamples=1_000, seed=0)
    assert r.passed


# ---------------------------------------------------------------------------
# Jacobian bounds


def test_jacobian_fits_stable_reduced():
    r = verify_jacobian_bounds(nsamples=6_000, seed=0)
    assert r.passed, (r.max_slack, r.worst_case)
    d = r.details
    for name in ("C_GS", "C_S", "C_case1", "C_case2", "C_case3"):
        assert d[f"{name}_spread"] <= 0.3
    assert all(v <= 1.1 for v in d["case3_doubling_ratio"].values())


# ---------------------------------------------------------------------------
# report container


def test_report_merge_contract():
    a = CheckReport("X", 10, 1, -0.5, {"v": 1}, {"k": 1.0})
    b = CheckReport("X", 20, 2, -0.1, {"v": 2}, {"j": 2.0})
    m = a.merge(b)
    assert (m.samples_run, m.violations) == (30, 3)
    assert m.max_slack == -0.1
    assert m.worst_case == {"v": 2}
    assert m.details == {"k": 1.0, "j": 2.0}
    with pytest.raises(ValueError):
        a.merge(CheckReport("Y", 1, 0, 0.0))


def test_report_json_roundtrip():
    r = run_suite("L2_1", samples=2_000, seed=0)[0]
    back = json.loads(r.to_json())
    assert back["lemma_id"] == r.lemma_id
    assert back["passed"] is True
    assert back["violations"] == 0
