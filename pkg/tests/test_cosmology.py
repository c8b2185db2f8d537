"""Scale-factor families and the forcing-integral convergence verdict."""

import numpy as np
import pytest

from rwboltz.cosmology import (
    DeSitter,
    EinsteinDeSitter,
    PowerLaw,
    forcing,
    integrability,
)

FAMILIES = [
    PowerLaw(c=1.0, q=0.4),
    PowerLaw(c=2.0, q=1.5),
    EinsteinDeSitter(c=1.0),
    EinsteinDeSitter(c=0.3),
    DeSitter(H=1.0),
    DeSitter(H=0.2),
]


@pytest.mark.parametrize("spec", FAMILIES)
def test_normalization_and_monotonicity(spec):
    assert spec.R(0.0) == pytest.approx(1.0)
    ts = np.linspace(0.0, 50.0, 200)
    R = spec.R(ts)
    assert np.all(np.diff(R) >= 0.0)
    assert np.all(spec.Rdot(ts) >= 0.0)


def test_R_values():
    assert DeSitter(H=1.0).R(np.log(2.0)) == pytest.approx(2.0, rel=1e-14)
    assert EinsteinDeSitter(c=1.0).R(7.0) == pytest.approx(4.0, rel=1e-14)
    assert PowerLaw(c=2.0, q=0.5).R(4.0) == pytest.approx(3.0, rel=1e-14)


@pytest.mark.parametrize("spec", FAMILIES)
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_Rdot_matches_finite_difference(spec, t):
    h = 1e-5
    fd = (spec.R(t + h) - spec.R(t - h)) / (2.0 * h)
    assert spec.Rdot(t) == pytest.approx(fd, rel=1e-6)


def test_negative_time_rejected():
    for spec in FAMILIES:
        with pytest.raises(ValueError):
            spec.R(-0.5)


def test_parameter_validation():
    for ctor in (lambda: PowerLaw(c=0.0, q=1.0), lambda: PowerLaw(c=1.0, q=0.0),
                 lambda: EinsteinDeSitter(c=-1.0), lambda: DeSitter(H=0.0)):
        with pytest.raises(ValueError):
            ctor()


def test_forcing_formula():
    spec = DeSitter(H=1.0)
    t = 2.0
    R = float(spec.R(t))
    assert forcing(spec, 1.5, t) == pytest.approx(R ** -3 + R ** -2.5, rel=1e-13)


# ---------------------------------------------------------------------------
# integrability verdicts


MATRIX = [
    # (spec, b, converges)
    (EinsteinDeSitter(c=1.0), 2.0, True),     # (4-b) 2/3 = 4/3 > 1
    (EinsteinDeSitter(c=1.0), 2.75, False),   # (4-b) 2/3 = 5/6 < 1
    (PowerLaw(c=1.0, q=0.4), 1.0, True),      # 3q = 1.2 > 1, (4-b)q = 1.2 > 1
    (PowerLaw(c=1.0, q=0.4), 2.999, False),   # (4-b)q ~ 0.4 < 1
    (DeSitter(H=1.0), 0.0, True),
    (DeSitter(H=1.0), 2.9, True),
]


@pytest.mark.parametrize("spec,b,expected", MATRIX)
def test_integrability_matrix(spec, b, expected):
    report = integrability(spec, b)
    assert report.converges is expected
    assert report.numeric_converges is expected
    assert report.consistent


def test_integrability_analytic_numeric_agreement():
    # wider sweep: every family crossed with several exponents
    count = 0
    for spec in FAMILIES:
        for b in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 2.9):
            report = integrability(spec, b)
            assert report.consistent, (spec, b)
            count += 1
    assert count >= 20


def test_integrability_value_for_exponential_factor():
    # int_0^inf e^(-3Ht) + e^((b-4)Ht) dt = 1/(3H) + 1/((4-b)H)
    H, b = 0.7, 1.0
    report = integrability(DeSitter(H=H), b)
    exact = 1.0 / (3.0 * H) + 1.0 / ((4.0 - b) * H)
    assert report.numeric_estimate == pytest.approx(exact, rel=1e-6)


def test_integrability_rejects_bad_exponent():
    with pytest.raises(ValueError):
        integrability(DeSitter(H=1.0), 3.0)
    with pytest.raises(ValueError):
        integrability(DeSitter(H=1.0), -0.1)
