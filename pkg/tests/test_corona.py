import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ipv import corona as co
from ipv import hypgeom as hg


def ball_points(rng, n, d, rmax=0.95):
    return hg.uniform_sphere(n, d, rng) * (rmax * rng.uniform(size=(n, 1)) ** (1 / d))


def test_radius_delay_roundtrip():
    for d in (2, 3, 4):
        D = np.linspace(-3, 3, 13)
        assert np.allclose(co.delay_of_radius(co.radius_of_delay(D, d), d), D, atol=1e-12)
    assert co.radius_of_delay(0.0, 2) == pytest.approx(math.pi)
    assert co.radius_of_delay(0.0, 3) == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        co.delay_of_radius(0.0, 2)


def test_make_process_sorts_and_indexes_from_one():
    th = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    p = co.make_process(th, [3.0, 1.0, 2.0])
    assert list(p.radii) == [1.0, 2.0, 3.0]
    assert np.allclose(p[1].theta, [0.0, 1.0])
    assert p[3].R == 3.0
    with pytest.raises(IndexError):
        p[0]
    with pytest.raises(IndexError):
        p[4]
    with pytest.raises(ValueError):
        co.make_process(th[:2], [1.0, 1.0])


def test_single_nucleus_owns_everything():
    p = co.make_process([[0.0, 1.0]], [2.0])
    rng = np.random.default_rng(0)
    z = ball_points(rng, 100, 2)
    vals, idx, unsafe = co.separation_field_many(z, p, exhaustive=True)
    assert np.all(idx == 1)
    assert np.allclose(vals, 2.0 / hg.poisson_kernel(z, [0.0, 1.0]))


def test_separation_at_origin_is_radius():
    p = co.make_process([[0.0, 1.0], [1.0, 0.0]], [1.5, 0.7])
    assert co.separation(np.zeros(2), p[1]) == pytest.approx(0.7)
    sv = co.separation_field(np.zeros(2), p, exhaustive=True)
    assert sv.argmin_index == 1 and sv.value == pytest.approx(0.7)


def test_two_nuclei_symmetric_bisector():
    # equal radii at antipodal angles: the bisector is the perpendicular diameter
    p = co.make_process([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0 + 1e-9])
    assert co.cell_of([0.3, 0.4], p) == 1
    assert co.cell_of([-0.3, 0.4], p) == 2
    assert co.cell_membership([0.0, 0.5], 1, p)
    assert not co.cell_membership([0.0, 0.5], 2, p)
    assert co.cell_membership([-1e-6, 0.5], 2, p)


def test_empty_process_and_outside_points():
    p = co.sample_nuclei(2, 0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        co.separation_field(np.zeros(2), p)
    q = co.sample_nuclei(2, 5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        co.separation_field(np.array([1.0, 0.0]), q)


@pytest.mark.parametrize("d", [2, 3])
def test_truncated_search_matches_exhaustive(d):
    rng = np.random.default_rng(d)
    p = co.sample_nuclei(d, 2000, rng)
    z = ball_points(rng, 500, d, 0.9)
    a = co.separation_field_many(z, p)
    b = co.separation_field_many(z, p, exhaustive=True)
    ok = ~a[2]
    assert ok.mean() > 0.9
    assert np.array_equal(a[1][ok], b[1][ok])
    assert np.allclose(a[0][ok], b[0][ok], rtol=1e-14, atol=0)


def test_unsafe_flag_is_raised_for_tiny_process():
    p = co.sample_nuclei(2, 2, np.random.default_rng(3))
    z = 0.99 * hg.uniform_sphere(200, 2, np.random.default_rng(4))
    _, _, unsafe = co.separation_field_many(z, p)
    assert unsafe.any()
    bad = z[np.argmax(unsafe)]
    with pytest.raises(co.TruncationUnsafe):
        co.cell_of(bad, p, strict=True)


@pytest.mark.parametrize("d", [2, 3])
def test_isometry_equivariance(d):
    rng = np.random.default_rng(10 + d)
    p = co.sample_nuclei(d, 300, rng)
    for _ in range(5):
        iso = hg.random_isometry(d, rng)
        new, order = co.mobius_process(iso, p)
        z = ball_points(rng, 100, d, 0.6)
        a = co.separation_field_many(z, p, exhaustive=True)
        b = co.separation_field_many(iso(z), new, exhaustive=True)
        assert np.allclose(a[0], b[0], rtol=1e-10, atol=0)
        assert np.array_equal(order[b[1] - 1] + 1, a[1])
        single = co.mobius_corona(iso, p[1])
        assert single.R == pytest.approx(new.radii[np.nonzero(order == 0)[0][0]], rel=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_sample_nuclei_law(d):
    rng = np.random.default_rng(20 + d)
    p = co.sample_nuclei(d, 20_000, rng)
    gaps = np.diff(np.concatenate([[0.0], p.radii]))
    assert stats.kstest(gaps, "expon").pvalue > 0.01
    assert np.allclose(np.linalg.norm(p.thetas, axis=1), 1.0)
    assert abs(p.thetas.mean(axis=0)).max() < 0.03
    assert np.allclose(co.radius_of_delay(p.delays, d), p.radii, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(0.05, 20.0),
    st.floats(0.05, 20.0),
    st.lists(st.floats(-5, 5), min_size=1, max_size=2),
)
def test_bisector_points_have_equal_separation(r1, r, C):
    d = len(C) + 1
    C = np.array(C)
    hs = co.bisector_halfspace(r1, C, r, d)
    rng = np.random.default_rng(0)
    w = hg.uniform_sphere(20, d, rng)
    w[:, -1] = np.abs(w[:, -1]) + 1e-3
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    q = np.concatenate([hs.center, [0.0]]) + hs.rho * w
    z = hg.cayley_inverse(q)
    north = np.zeros(d)
    north[-1] = 1.0
    th = hg.stereographic_inverse(C)
    a = r1 / hg.poisson_kernel(z, north)
    b = r / hg.poisson_kernel(z, th)
    assert np.all(np.abs(a / b - 1) < 1e-8)


def test_bisector_rejects_bad_radii():
    with pytest.raises(ValueError):
        co.bisector_halfspace(0.0, [0.0], 1.0, 2)


def test_finite_ppp_counts_and_delays():
    rng = np.random.default_rng(5)
    d, lam, r_max = 2, 0.1, 4.0
    counts = [len(co.sample_finite_ppp(d, lam, r_max, rng).points) for _ in range(400)]
    mean = lam * hg.volume_growth(d, r_max)
    assert abs(np.mean(counts) - mean) < 4 * math.sqrt(mean / 400)
    s = co.sample_finite_ppp(d, lam, r_max, rng)
    assert np.all(np.diff(s.distances) >= 0)
    assert np.all(np.linalg.norm(s.points, axis=1) < 1)
    assert np.allclose(hg.ball_distance(np.zeros((len(s.points), d)), s.points), s.distances, atol=1e-9)
    assert np.allclose(co.empirical_delays(s), s.distances - math.log(10.0))
    with pytest.raises(ValueError):
        co.sample_finite_ppp(d, 1.0, 40.0, rng)


def test_first_delay_survival_limit():
    t = np.linspace(-2, 1, 7)
    for d in (2, 3):
        lim = co.first_delay_survival(t, d)
        near = co.first_delay_survival(t, d, lam=1e-6)
        assert np.abs(lim - near).max() < 1e-5
        assert np.all(np.diff(lim) < 0)


def test_delay_examples():
    assert co.delay_of_radius(math.pi, 2) == pytest.approx(0.0, abs=1e-15)
    assert co.delay_of_radius(math.pi * math.e, 2) == pytest.approx(1.0, rel=1e-14)
    assert co.delay_of_radius(math.pi / 2 * math.e**2, 3) == pytest.approx(1.0, rel=1e-14)


def test_separation_examples():
    nuc = co.CoronaPoint(np.array([1.0, 0.0]), 3.0, co.delay_of_radius(3.0, 2))
    assert co.separation([0.5, 0.0], nuc) == pytest.approx(1.0, rel=1e-14)
    rng = np.random.default_rng(30)
    for d in (2, 3):
        th = hg.uniform_sphere(1, d, rng)[0]
        z = ball_points(rng, 20, d)
        rot = hg.random_rotation(d, rng)
        a = co.separation(z, co.CoronaPoint(th, 1.7, 0.0))
        b = co.separation(z @ rot.T, co.CoronaPoint(rot @ th, 1.7, 0.0))
        assert np.allclose(a, b, rtol=1e-10, atol=0)


def test_origin_lies_in_first_cell():
    rng = np.random.default_rng(31)
    for d in (2, 3):
        p = co.sample_nuclei(d, 50, rng)
        sv = co.separation_field(np.zeros(d), p)
        assert sv.argmin_index == 1 and sv.value == p.radii[0]
        assert co.cell_of(np.zeros(d), p) == 1


def test_sample_nuclei_moments():
    rng = np.random.default_rng(32)
    first = np.array([co.sample_nuclei(2, 1, rng).radii[0] for _ in range(20_000)])
    assert abs(first.mean() - 1) < 3 * first.std() / math.sqrt(first.size)
    counts = np.array([(co.sample_nuclei(2, 30, rng).radii <= 5).sum() for _ in range(10_000)])
    assert abs(counts.mean() - 5) < 3 * math.sqrt(5 / counts.size)


def test_mobius_corona_identity_rotation_and_action():
    rng = np.random.default_rng(33)
    for d in (2, 3):
        nuc = co.CoronaPoint(hg.uniform_sphere(1, d, rng)[0], 2.5, co.delay_of_radius(2.5, d))
        same = co.mobius_corona(hg.identity(d), nuc)
        assert np.allclose(same.theta, nuc.theta) and same.R == pytest.approx(nuc.R, rel=1e-14)
        rot = hg.random_rotation(d, rng)
        turned = co.mobius_corona(hg.Isometry(rot, np.zeros(d)), nuc)
        assert np.allclose(turned.theta, rot @ nuc.theta, atol=1e-14)
        assert turned.R == pytest.approx(nuc.R, rel=1e-14)
        for _ in range(20):
            phi, psi = hg.random_isometry(d, rng), hg.random_isometry(d, rng)
            one = co.mobius_corona(hg.compose(psi, phi), nuc)
            two = co.mobius_corona(psi, co.mobius_corona(phi, nuc))
            assert np.allclose(one.theta, two.theta, atol=1e-9)
            assert one.R == pytest.approx(two.R, rel=1e-9)
            assert one.D == pytest.approx(co.delay_of_radius(one.R, d), rel=1e-12, abs=1e-12)


def test_bisector_examples():
    hs = co.bisector_halfspace(1.3, [0.0], 1.3, 2)
    assert hs.rho == pytest.approx(1.0) and np.allclose(hs.center, 0.0)
    assert co.bisector_halfspace(16.0, [0.0], 1.0, 2).rho == pytest.approx(4.0, rel=1e-15)


def test_cells_are_star_shaped_towards_their_end():
    # stepping along the geodesic from z to theta_i keeps z in cell i
    rng = np.random.default_rng(34)
    p = co.sample_nuclei(2, 400, rng)
    z = ball_points(rng, 200, 2, 0.8)
    _, idx, _ = co.separation_field_many(z, p, exhaustive=True)
    for zi, i in zip(z, idx):
        theta = p.thetas[i - 1]
        iso = hg.mobius_to_origin(zi)
        tip = hg.apply_boundary(iso, theta)
        for t in np.linspace(0.05, 0.95, 10):
            w = hg.apply_inverse(iso, t * tip)
            assert co.cell_membership(w, int(i), p)


def test_at_most_three_cells_meet_in_the_disk():
    rng = np.random.default_rng(35)
    p = co.sample_nuclei(2, 100, rng)
    axis = np.linspace(-0.7, 0.7, 301)
    X, Y = np.meshgrid(axis, axis)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    _, lab, _ = co.separation_field_many(pts, p, exhaustive=True)
    lab = lab.reshape(X.shape)
    blocks = np.stack([lab[:-1, :-1], lab[1:, :-1], lab[:-1, 1:], lab[1:, 1:]], axis=-1)
    distinct = (np.diff(np.sort(blocks, axis=-1), axis=-1) != 0).sum(axis=-1) + 1
    assert distinct.max() <= 3


def test_finite_ppp_spec_example():
    rng = np.random.default_rng(36)
    mean = 0.1 * 2 * math.pi * (math.cosh(10.0) - 1)
    assert mean == pytest.approx(6919.3, abs=0.5)
    samples = [co.sample_finite_ppp(2, 0.1, 10.0, rng) for _ in range(100)]
    counts = np.array([len(s.points) for s in samples])
    assert abs(counts.mean() - mean) < 3 * math.sqrt(mean / 100)
    dist = samples[0].distances
    assert dist.max() <= 10.0
    cdf = lambda r: hg.volume_growth(2, np.clip(r, 0, 10)) / hg.volume_growth(2, 10.0)
    assert stats.kstest(dist, cdf).pvalue > 0.01
    tr = co.radius_of_delay(co.empirical_delays(samples[0]), 2)
    assert abs(np.diff(tr)[:200].mean() - 1) < 0.25
