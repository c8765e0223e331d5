import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from ipv import analytic as an
from ipv import hypgeom as hg

R_GRID = np.array([0.0, 0.1, 0.3, 0.5, 1.0, 1.5, 2.0, 3.0])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_I_zero_and_monotone(d):
    assert abs(an.I_d(d, 0.0, method="quad")) < 1e-12
    vals = an.I_d(d, R_GRID, method="quad")
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(ValueError):
        an.I_d(d, -0.1)


def test_I2_closed_form_matches_quadrature():
    assert np.allclose(an.I_d(2, R_GRID), an.I_d(2, R_GRID, method="quad"), rtol=1e-8, atol=1e-12)


def test_I_radial_integral_against_direct_planar_integral():
    # oracle: integrate c_bold * rho^(1-2d) over the set of half-spheres that
    # meet the ball, as a double integral over (x, rho) for d = 2
    r = 0.8
    C, S = math.cosh(r), math.sinh(r)
    cb = hg.dim_constants(2).c_bold

    def inner(x):
        lo = max(math.hypot(x, C) - S, 1e-300)
        hi = math.sqrt(1 + x * x)
        if hi <= lo:
            return 0.0
        return cb * (lo**-2 - hi**-2) / 2

    v = integrate.quad(inner, -np.inf, np.inf, epsabs=1e-12, limit=400)[0]
    assert v == pytest.approx(an.I_d(2, r), rel=1e-8)


def test_hole_examples():
    assert an.hole_prob(2, 0.0) == 1.0 and an.hole_prob(3, 0.0, 1.7) == 1.0
    expected = math.pi / (4 * math.atan(math.e) * math.cosh(1) ** 2 + 2 * math.sinh(1))
    assert an.hole_prob(2, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.225142, abs=1e-6)
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(an.hole_prob(3, r), 3 * np.exp(-2 * r) / (2 + np.exp(2 * r)), rtol=1e-8, atol=0)
    assert an.hole_prob(3, 1.0) == pytest.approx(0.0432425, abs=1e-7)
    i3 = (2 + math.e**2) * math.e**2 / 3 - 1
    assert an.hole_prob(3, 1.0, 2.0) == pytest.approx(math.exp(-2 * i3), rel=1e-9)
    assert np.allclose(an.hole_prob(2, R_GRID), an.hole_prob_2d_closed(R_GRID), rtol=1e-13)


@pytest.mark.parametrize("d", [2, 3])
def test_hole_prob_ordering(d):
    p = an.hole_prob(d, R_GRID, 1.0)
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) <= 0)
    assert np.all(np.diff(p[:5]) < 0)
    assert np.all(an.hole_prob(d, R_GRID[1:5], 2.0) < an.hole_prob(d, R_GRID[1:5], 1.0))


@pytest.mark.parametrize("d,r", [(2, 0.5), (2, 1.5), (3, 1.0)])
def test_averaging_identity(d, r):
    i = an.I_d(d, r)
    v = integrate.quad(lambda s: math.exp(-s * i) * math.exp(-s), 0, np.inf, epsabs=1e-14)[0]
    assert v == pytest.approx(an.hole_prob(d, r), abs=1e-9)


def test_hole_density_examples():
    assert an.hole_density_2d(0.0) == pytest.approx(4 / math.pi, rel=1e-14)
    total = integrate.quad(an.hole_density_2d, 0, np.inf, epsabs=1e-12, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-8)
    r = np.linspace(0.05, 3, 30)
    h = 1e-6
    fd = -(an.hole_tail_2d(r + h) - an.hole_tail_2d(r - h)) / (2 * h)
    assert np.allclose(fd, an.hole_density_2d(r), rtol=1e-7)
    assert an.hole_mean_2d() == pytest.approx(0.66137, abs=1e-4)
    assert an.hole_median_2d() == pytest.approx(0.50264, abs=1e-4)
    assert an.hole_tail_2d(an.hole_median_2d()) == pytest.approx(0.5, abs=1e-14)


def test_gauss_2f1_examples():
    assert an.gauss_2f1(0.3, 1.7, 2.2, 0.0) == 1.0
    assert an.gauss_2f1(1, 1, 2, 0.5) == pytest.approx(-math.log(0.5) / 0.5, rel=1e-10)
    for a, b, c, x in [(0.5, 1.5, 0.5, 0.3), (1.0, 2.5, 1.5, 0.8), (1.5, 2.5, 0.5, 0.95), (2, 3, 1.5, 0.99)]:
        assert an.gauss_2f1(a, b, c, x) == pytest.approx(special.hyp2f1(a, b, c, x), rel=1e-10)
    with pytest.raises(ValueError):
        an.gauss_2f1(1, 1, -2, 0.3)
    with pytest.raises(ValueError):
        an.gauss_2f1(1, 1, 2, 1.0)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("r", [0.3, 1.0, 2.0])
def test_hypergeometric_form_matches_quadrature(d, r):
    assert an.one_plus_I_hypergeometric(d, r) == pytest.approx(1 + an.I_d(d, r, method="quad"), rel=1e-7)


def test_isoperimetric_examples():
    assert an.isoperimetric_constant(2) == 4 / math.pi
    assert an.isoperimetric_constant(3) == pytest.approx(8 / 3, rel=1e-14)
    for d in (2, 3, 4):
        assert an.hole_law_slope_at_zero(d) == pytest.approx(an.isoperimetric_constant(d), abs=1e-6)
    assert abs(an.isoperimetric_constant(50) - an.isoperimetric_asymptote(50)) < 0.01


def test_height_and_angle_laws():
    assert an.height_cdf(2, 1.0, 1.0) == pytest.approx(math.exp(-1))
    assert an.height_cdf(3, 1.0, 0.0) == 0.0 and an.height_cdf(2, 1.0, -1.0) == 0.0
    assert an.height_cdf_avg(2, 1.0) == 0.5
    for d in (2, 3):
        # averaging the conditional law over s ~ Exp(1)
        for h in (0.3, 1.0, 2.5):
            v = integrate.quad(lambda s: an.height_cdf(d, s, h) * math.exp(-s), 0, np.inf)[0]
            assert v == pytest.approx(an.height_cdf_avg(d, h), rel=1e-9)
    for d in (2, 3, 4):
        tot = integrate.quad(lambda t: an.angle_density(d, t), 0, math.pi / 2, epsabs=1e-13)[0]
        assert tot == pytest.approx(1.0, abs=1e-10)
        beta = stats.beta((d + 1) / 2, (d - 1) / 2)
        for m in range(1, 5):
            mom = integrate.quad(lambda t: math.sin(t) ** (2 * m) * an.angle_density(d, t), 0, math.pi / 2,
                                 epsabs=1e-13)[0]
            assert mom == pytest.approx(beta.moment(m), abs=1e-8)
    inv_sin = integrate.quad(lambda t: an.angle_density(2, t) / math.sin(t), 0, math.pi / 2)[0]
    assert inv_sin == pytest.approx(4 / math.pi, rel=1e-10)


def test_nu_estimator_small_runs():
    rng = np.random.default_rng(1)
    est, se = an.nu_d_mc(2, 400_000, rng, chunk=100_000)
    assert abs(est - an.NU2) < 4 * se and se < 0.01
    est3, se3 = an.nu_d_mc(3, 400_000, rng)
    assert abs(est3 - an.NU3) < 4 * se3 + 0.002
    with pytest.raises(ValueError):
        an.nu_d_mc(1, 10, rng)


def test_nu_estimator_is_reproducible_and_chunk_independent():
    a = an.nu_d_mc(2, 10_000, np.random.default_rng(5), chunk=10_000)
    b = an.nu_d_mc(2, 10_000, np.random.default_rng(5), chunk=10_000)
    assert a == b


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_vertex_intensity_integrates_to_count(d, s):
    tot = integrate.quad(lambda z: an.vertex_intensity(d, z, s), 0, np.inf, limit=200)[0]
    assert tot == pytest.approx(an.vertices_per_unit(d, s), rel=1e-8)


def test_vertex_intensity_values():
    assert an.vertices_per_unit(2, 1.0) == pytest.approx(3 / math.pi, rel=1e-14)
    assert an.vertices_per_unit(3, 1.0) == pytest.approx(32 * an.NU3 / math.pi**3, rel=1e-14)
    assert an.vertices_per_unit(3, 1.0) == pytest.approx(2.873, abs=1e-3)
    with pytest.raises(ValueError):
        an.vertex_intensity(2, 0.0, 1.0)
    with pytest.raises(ValueError):
        an.vertex_intensity(4, 1.0, 1.0)
    # the averaged density is the conditional one integrated against Exp(1)
    for d in (2, 3):
        for z in (0.4, 1.0, 2.0):
            v = integrate.quad(lambda s: an.vertex_intensity(d, z, s) * math.exp(-s), 0, np.inf)[0]
            assert v == pytest.approx(an.vertex_intensity(d, z), rel=1e-9)
    z = 1.3
    assert an.vertex_intensity(2, z) == pytest.approx((2 / math.pi) ** 2 * an.NU2 / (z * (1 + z) ** 3))


def test_edge_and_face_constants():
    assert an.mean_edge_length_2d() == 4 / 3
    assert an.mean_face_area_3d() == pytest.approx(0.9284, abs=1e-4)
    lo, hi = an.mean_face_area_3d(an.NU3 + 0.001), an.mean_face_area_3d(an.NU3 - 0.001)
    assert lo <= 0.928 + 0.003 and hi >= 0.928 - 0.003
    # length per vertex gap: (4/(pi s)) / (3/(pi s)) = 4/3
    assert an.boundary_length_per_unit_2d(0.7) / an.vertices_per_unit(2, 0.7) == pytest.approx(4 / 3)


def test_tree_pmf_examples():
    assert [an.tree_root_degree_pmf(3, j) for j in (1, 2, 3)] == pytest.approx([1 / 3] * 3, rel=1e-14)
    assert an.tree_root_degree_pmf(4, 4) == pytest.approx(1 / 7, rel=1e-15)
    for k in range(3, 9):
        assert sum(an.tree_root_degree_pmf(k, j) for j in range(1, k + 1)) == pytest.approx(1.0, abs=1e-12)
    for bad in [(2, 1), (3, 0), (3, 4)]:
        with pytest.raises(ValueError):
            an.tree_root_degree_pmf(*bad)
