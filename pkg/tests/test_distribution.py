"""Grid fields: interpolation contracts and order, weighted norms,
moments, entropy, and the two initial-data constructors."""

import numpy as np
import pytest

from rwboltz.distribution import (
    DistributionField,
    EquilibriumParams,
    VGrid,
    decay_certificate,
    entropy,
    equilibrium,
    gaussian_initial_data,
    interpolate,
    moments,
    weighted_norm,
)


def smooth_field(grid, width=0.5):
    return DistributionField(grid, np.exp(-width * grid.squared_radius()))


# ---------------------------------------------------------------------------
# grid and field contracts


def test_grid_validation():
    with pytest.raises(ValueError):
        VGrid(vmax=0.0, n=8)
    with pytest.raises(ValueError):
        VGrid(vmax=1.0, n=7)
    g = VGrid(vmax=2.0, n=9)
    assert g.h == pytest.approx(0.5)
    assert g.node_coords().shape == (729, 3)
    assert np.sum(g.trapezoid_weights()) == pytest.approx((2 * 2.0) ** 3)


def test_field_validation():
    g = VGrid(vmax=1.0, n=8)
    with pytest.raises(ValueError):
        DistributionField(g, np.zeros((8, 8)))
    vals = np.zeros((8, 8, 8))
    vals[0, 0, 0] = -1e-8
    with pytest.raises(ValueError):
        DistributionField(g, vals)
    vals[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        DistributionField(g, vals)


def test_field_values_are_frozen():
    g = VGrid(vmax=1.0, n=8)
    source = np.ones((8, 8, 8))
    f = DistributionField(g, source)
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 2.0
    source[0, 0, 0] = 5.0   # the field holds a copy
    assert f.values[0, 0, 0] == 1.0


# ---------------------------------------------------------------------------
# interpolation


def test_interpolation_exact_at_nodes(rng):
    g = VGrid(vmax=2.0, n=10)
    f = DistributionField(g, rng.random((10, 10, 10)))
    pts = g.node_coords()
    np.testing.assert_allclose(interpolate(f, pts),
                               f.values.ravel(), rtol=1e-12, atol=1e-12)


def test_interpolation_outside_is_zero():
    g = VGrid(vmax=1.0, n=8)
    f = DistributionField(g, np.ones((8, 8, 8)))
    out = interpolate(f, np.array([[1.5, 0.0, 0.0], [0.0, -1.0001, 0.0]]))
    np.testing.assert_array_equal(out, [0.0, 0.0])


def test_interpolation_edge_midpoint_mean(rng):
    g = VGrid(vmax=1.0, n=9)
    f = DistributionField(g, rng.random((9, 9, 9)))
    x = g.axis
    mid = np.array([0.5 * (x[3] + x[4]), x[2], x[6]])
    want = 0.5 * (f.values[3, 2, 6] + f.values[4, 2, 6])
    assert interpolate(f, mid) == pytest.approx(want, rel=1e-13)


def test_interpolation_exact_on_trilinear(rng):
    g = VGrid(vmax=1.5, n=9)
    c = g.node_coords()

    def tri(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return 3.0 + x + 2 * y - z + x * y + y * z + 0.5 * x * z + x * y * z

    vals = tri(c).reshape(9, 9, 9)
    f = DistributionField(g, vals - vals.min())     # keep nonnegative
    pts = rng.uniform(-1.5, 1.5, (500, 3))
    np.testing.assert_allclose(interpolate(f, pts),
                               tri(pts) - vals.min(), rtol=1e-12, atol=1e-12)


def test_interpolation_second_order(rng):
    # halving h cuts the max error by ~4; slope across refinements >= 1.9
    vmax = 2.0
    pts = rng.uniform(-0.8 * vmax, 0.8 * vmax, (2000, 3))
    exact = np.exp(-np.einsum("ij,ij->i", pts, pts))
    errs = []
    for n in (17, 33, 65):
        g = VGrid(vmax=vmax, n=n)
        f = smooth_field(g, width=1.0)
        errs.append(float(np.max(np.abs(interpolate(f, pts) - exact))))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(slopes >= 1.9)


# ---------------------------------------------------------------------------
# norms and moments


def test_weighted_norm_zero_and_homogeneity(rng):
    g = VGrid(vmax=2.0, n=12)
    assert weighted_norm(DistributionField(g, np.zeros((12,) * 3))) == 0.0
    f = DistributionField(g, rng.random((12,) * 3))
    f3 = DistributionField(g, 3.0 * f.values)
    assert weighted_norm(f3) == pytest.approx(3.0 * weighted_norm(f), rel=1e-12)


def test_weighted_norm_gaussian_value_part():
    # e^{|v|^2} * eps e^{-2|v|^2} peaks at the origin with value eps
    g = VGrid(vmax=4.0, n=33)
    eps = 1e-3
    f = gaussian_initial_data(eps, 2.0, g)
    assert decay_certificate(f) == pytest.approx(eps, rel=1e-12)
    assert weighted_norm(f) >= eps


def test_moments_values(rng):
    g = VGrid(vmax=6.0, n=61)
    zero = DistributionField(g, np.zeros((61,) * 3))
    m0 = moments(zero, 1.0)
    assert m0.mass == 0.0 and m0.energy == 0.0
    assert np.all(m0.momentum == 0.0)

    f = smooth_field(g, width=1.0)       # e^{-|v|^2}
    m = moments(f, 1.0)
    assert m.mass == pytest.approx(np.pi ** 1.5, rel=1e-3)
    assert np.max(np.abs(m.momentum)) < 1e-12 * m.mass

    # linearity
    f2 = DistributionField(g, 2.0 * f.values)
    assert moments(f2, 1.0).mass == pytest.approx(2.0 * m.mass, rel=1e-12)


def test_moments_energy_limits():
    # at huge R the energy integral approaches the mass integral (v0 -> 1)
    g = VGrid(vmax=4.0, n=17)
    f = smooth_field(g, width=1.0)
    m = moments(f, 1e6)
    assert m.energy == pytest.approx(m.mass, rel=1e-9)


def test_entropy_scaling_identity(rng):
    g = VGrid(vmax=2.0, n=12)
    f = DistributionField(g, 0.5 + rng.random((12,) * 3))
    assert entropy(DistributionField(g, np.zeros((12,) * 3))) == 0.0
    a = 2.5
    fa = DistributionField(g, a * f.values)
    want = a * entropy(f) + a * np.log(a) * moments(f, 1.0).mass
    assert entropy(fa) == pytest.approx(want, rel=1e-10)


# ---------------------------------------------------------------------------
# constructors


def test_gaussian_initial_data_contracts():
    g = VGrid(vmax=3.0, n=16)
    z = gaussian_initial_data(0.0, 2.0, g)
    assert np.all(z.values == 0.0)
    with pytest.raises(ValueError):
        gaussian_initial_data(1e-3, 1.0, g)
    with pytest.raises(ValueError):
        gaussian_initial_data(-1e-3, 2.0, g)
    f1 = gaussian_initial_data(1e-3, 2.0, g)
    f2 = gaussian_initial_data(2e-3, 2.0, g)
    np.testing.assert_allclose(f2.values, 2.0 * f1.values, rtol=1e-13)


def test_equilibrium_isotropy_and_bound():
    g = VGrid(vmax=3.0, n=17)
    f = equilibrium(EquilibriumParams(alpha=0.0), 2.0, g)
    # beta = 0: invariant under v -> -v along each axis
    np.testing.assert_allclose(f.values, f.values[::-1, :, :], rtol=1e-13)
    np.testing.assert_allclose(f.values, f.values[:, :, ::-1], rtol=1e-13)
    with pytest.raises(ValueError):
        equilibrium(EquilibriumParams(alpha=0.0, beta=(1.0, 0, 0), gamma=1.0),
                    2.0, g)


def test_equilibrium_mass_monotone_in_gamma():
    g = VGrid(vmax=3.0, n=17)
    masses = [moments(equilibrium(EquilibriumParams(alpha=0.0, gamma=gam),
                                  1.0, g), 1.0).mass
              for gam in (1.0, 2.0, 4.0, 8.0)]
    assert all(a > b for a, b in zip(masses, masses[1:]))


def test_equilibrium_params_validation():
    with pytest.raises(ValueError):
        EquilibriumParams(alpha=0.0, gamma=0.0)
