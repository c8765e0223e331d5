"""The typical cell as the region above a Poisson cloud of half-spheres.

Conditional on ``R_1 = s`` the cell of the origin, seen in the upper
half-space with the origin at ``(0, ..., 0, 1)``, is the complement of the
union of open half-balls ``{(y, z): |y - x|^2 + z^2 < rho^2}`` where
``(x, rho)`` is a Poisson process of intensity ``c_bold * s * dx rho^(1-2d) drho``
restricted to ``rho <= sqrt(1 + |x|^2)``.  Dropping the restriction gives the
stationary model.

Envelope computations use the lifting identity
``rho^2 - |y - x|^2 = (2 x.y + rho^2 - |x|^2) - |y|^2``: the upper envelope
of the spheres is an upper envelope of affine functions minus ``|y|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import hypgeom as hg

RESIDUAL_MASS = 1e-9
MAX_EXPECTED_SPHERES = 1e8


@dataclass(frozen=True, eq=False)
class HalfSphere:
    center: np.ndarray
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("half-sphere radius must be positive")
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        object.__setattr__(self, "rho", float(self.rho))


@dataclass(frozen=True, eq=False)
class DepositionSample:
    d: int
    s: float
    window_A: float
    rho_min: float
    constrained: bool
    centers: np.ndarray  # (n, d-1)
    rhos: np.ndarray
    residual_mass: float = 0.0

    def __len__(self) -> int:
        return len(self.rhos)

    @property
    def spheres(self) -> list[HalfSphere]:
        return [HalfSphere(c, r) for c, r in zip(self.centers, self.rhos)]


def from_spheres(spheres, d: int | None = None, s: float = 1.0, window_A: float = 1.0,
                 rho_min: float = 1e-3, constrained: bool = False) -> DepositionSample:
    """Wrap an explicit list of half-spheres (used for hand-built configurations)."""
    spheres = list(spheres)
    if d is None:
        d = len(spheres[0].center) + 1 if spheres else 2
    centers = np.array([h.center for h in spheres], dtype=float).reshape(len(spheres), d - 1)
    rhos = np.array([h.rho for h in spheres], dtype=float)
    return DepositionSample(d, s, window_A, rho_min, constrained, centers, rhos)


@dataclass(frozen=True)
class EnvelopePoint:
    base: np.ndarray
    H: float
    Theta: float
    sphere_index: int


class Uncovered(RuntimeError):
    """A base point (or interval) is not covered by any half-sphere shadow."""

    def __init__(self, msg, gaps=()):
        super().__init__(msg)
        self.gaps = list(gaps)


# ------------------------------------------------------------ band sampling


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def residual_mass(d: int, s, a: float, b: float, rho0, shape: str = "cube"):
    """Mass of ``c_bold s rho^(1-2d) drho dx`` over ``rho >= rho0`` and centres in
    the cube of half-width (``shape="cube"``) or ball of radius (``"ball"``)
    ``a + b rho``."""
    cb = hg.dim_constants(d).c_bold
    n = d - 1
    rho0 = np.asarray(rho0, dtype=float)
    tot = 0.0
    for j in range(n + 1):
        tot = tot + math.comb(n, j) * a ** (n - j) * b**j * rho0 ** (j + 2 - 2 * d) / (2 * d - 2 - j)
    pref = 2.0**n if shape == "cube" else _unit_ball_volume(n)
    return cb * np.asarray(s, dtype=float) * pref * tot


def _band_rho(rng, n, a, b, d):
    """Inverse-CDF draw from density proportional to ``rho^(1-2d)`` on ``[a, b)``."""
    p = 2 - 2 * d
    u = rng.uniform(size=n)
    return (a**p - u * (a**p - b**p)) ** (1.0 / p)


def _band_mass_factor(a, b, d):
    p = 2 - 2 * d
    return (a**p - b**p) / (2 * d - 2)


def sample_deposition(d: int, s: float, window_A: float, rho_min: float, constrained: bool,
                      rng: np.random.Generator, ratio: float = 2.0) -> DepositionSample:
    """Half-spheres with ``rho >= rho_min`` whose shadow meets ``[-A, A]^(d-1)``.

    Radii are drawn in geometric bands ``[a, ratio*a)``; within a band the
    centres are uniform in the window inflated by the band's largest radius
    and then kept when their shadow meets the window (and, if constrained,
    when ``rho^2 <= 1 + |x|^2``).
    """
    d = hg.check_dim(d)
    if not (s > 0 and window_A > 0 and 0 < rho_min < 1):
        raise ValueError("need s > 0, window_A > 0 and 0 < rho_min < 1")
    total = float(residual_mass(d, s, window_A, 1.0, rho_min))
    if total > MAX_EXPECTED_SPHERES:
        raise ValueError(f"expected {total:.3g} spheres; use a larger rho_min or a smaller window")
    cb = hg.dim_constants(d).c_bold
    n = d - 1
    cs, rs = [], []
    a = rho_min
    while True:
        b = ratio * a
        half = window_A + b
        mass = cb * s * (2 * half) ** n * _band_mass_factor(a, b, d)
        k = rng.poisson(mass)
        rho = _band_rho(rng, k, a, b, d)
        x = rng.uniform(-half, half, size=(k, n))
        gap = np.maximum(np.abs(x) - window_A, 0.0)
        keep = np.einsum("ij,ij->i", gap, gap) < rho**2
        if constrained:
            keep &= rho**2 <= 1.0 + np.einsum("ij,ij->i", x, x)
        cs.append(x[keep])
        rs.append(rho[keep])
        res = float(residual_mass(d, s, window_A, 1.0, b))
        if res < RESIDUAL_MASS:
            break
        a = b
    return DepositionSample(d, float(s), float(window_A), float(rho_min), bool(constrained),
                            np.concatenate(cs), np.concatenate(rs), res)


def _sample_ball_shell(rng, counts_total, r_in, r_out, n):
    """Uniform points in ``{r_in <= |x| <= r_out}`` of ``R^n`` (per-point radii arrays)."""
    u = rng.uniform(size=counts_total)
    rad = (r_in**n + u * (r_out**n - r_in**n)) ** (1.0 / n)
    if n == 1:
        dirs = np.where(rng.uniform(size=counts_total) < 0.5, -1.0, 1.0)[:, None]
    else:
        dirs = hg.uniform_sphere(counts_total, n, rng)
    return rad[:, None] * dirs


# ------------------------------------------------------------ point queries


def height_angle_at(x0, sample: DepositionSample) -> EnvelopePoint:
    """Height of the cell boundary above ``x0`` and its angle with the horizontal."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if len(sample) == 0:
        raise Uncovered(f"no half-sphere covers {x0}")
    dx = sample.centers - x0
    h2 = sample.rhos**2 - np.einsum("ij,ij->i", dx, dx)
    i = int(np.argmax(h2))
    if not h2[i] > 0:
        raise Uncovered(f"no half-sphere covers {x0}")
    H = math.sqrt(h2[i])
    theta = math.acos(min(1.0, math.sqrt(max(0.0, float(dx[i] @ dx[i]))) / sample.rhos[i]))
    return EnvelopePoint(x0, H, theta, i)


def contains_hyperbolic_ball(sample: DepositionSample, r: float) -> bool:
    """Whether the hyperbolic ball of radius ``r`` about ``(0,...,0,1)`` avoids every half-ball.

    Exact when ``window_A >= sinh r`` and ``rho_min <= exp(-r)``.
    """
    if not sample.constrained:
        raise ValueError("hole events are defined for the constrained deposition model")
    if r < 0:
        raise ValueError("r must be nonnegative")
    x2 = np.einsum("ij,ij->i", sample.centers, sample.centers)
    hit = np.sqrt(x2 + math.cosh(r) ** 2) <= sample.rhos + math.sinh(r)
    return not bool(np.any(hit))


def covering_check(sample: DepositionSample, grid_step: float) -> float:
    """Fraction of grid points of ``[-A, A]^(d-1)`` not covered by any shadow."""
    A = sample.window_A
    m = int(math.floor(2 * A / grid_step + 1e-9)) + 1
    axis = -A + grid_step * np.arange(m)
    n = sample.d - 1
    if len(sample) == 0:
        return 1.0
    if n == 1:
        lo = sample.centers[:, 0] - sample.rhos
        hi = sample.centers[:, 0] + sample.rhos
        order = np.argsort(lo)
        lo, hi = lo[order], np.maximum.accumulate(hi[order])
        # a grid point g is covered iff some interval with lo < g has hi > g
        pos = np.searchsorted(lo, axis, side="left")
        covered = (pos > 0) & (hi[np.maximum(pos - 1, 0)] > axis)
        return float(1.0 - covered.mean())
    shape = (m,) * n
    covered = np.zeros(shape, dtype=bool)
    for c, r in zip(sample.centers, sample.rhos):
        lo = np.clip(np.ceil((c - r + A) / grid_step).astype(int), 0, m - 1)
        hi = np.clip(np.floor((c + r + A) / grid_step).astype(int), 0, m - 1)
        if np.any(hi < lo):
            continue
        sl = tuple(slice(l, h + 1) for l, h in zip(lo, hi))
        grids = np.meshgrid(*[axis[s_] for s_ in sl], indexing="ij")
        d2 = sum((g - ci) ** 2 for g, ci in zip(grids, c))
        covered[sl] |= d2 < r * r
    return float(1.0 - covered.mean())


# ------------------------------------------------------------ 2D envelope


@dataclass(frozen=True, eq=False)
class Envelope2D:
    """Upper envelope of semicircles over ``[a, b]``.

    ``pieces`` are ``(sphere_index, x_left, x_right)`` in order; ``vertices``
    are breakpoints ``(x, z)`` with the pair of sphere indices meeting there.
    ``total_length`` is the Euclidean arc length; ``hyperbolic_length`` and
    ``hyperbolic_area_above`` use the metric ``|dx|/z``.
    """

    interval: tuple
    piece_index: np.ndarray
    piece_left: np.ndarray
    piece_right: np.ndarray
    vertices: np.ndarray
    vertex_pairs: np.ndarray
    total_length: float
    hyperbolic_length: float
    hyperbolic_area_above: float
    min_height: float
    counters: dict = field(default_factory=dict)

    @property
    def pieces(self):
        return list(zip(self.piece_index.tolist(), self.piece_left.tolist(), self.piece_right.tolist()))


def _prefilter_nested(c, rho):
    """Indices of semicircles not contained in another one, sorted by centre.

    A disc centred on the axis lies inside another iff its shadow interval does.
    """
    lo, hi = c - rho, c + rho
    order = np.lexsort((-hi, lo))
    hi_sorted = hi[order]
    prev_max = np.concatenate(([-np.inf], np.maximum.accumulate(hi_sorted)[:-1]))
    keep = order[hi_sorted > prev_max]
    return keep  # lo and hi strictly increasing, hence centres too


def _radical_x(ci, ri, cj, rj):
    return 0.5 * (ci + cj) + (ri - rj) * (ri + rj) / (2.0 * (cj - ci))


def _line_envelope(c, rho):
    """Upper envelope of ``x -> 2 c x + rho^2 - c^2`` for strictly increasing ``c``.

    Returns the stack of line positions and the breakpoints between them.
    """
    stack: list[int] = []
    brk: list[float] = []
    # nearly equal centres send the breakpoint to +-inf, which still orders correctly
    with np.errstate(over="ignore", divide="ignore"):
        for j in range(len(c)):
            while stack:
                i = stack[-1]
                x = _radical_x(c[i], rho[i], c[j], rho[j])
                if brk and x <= brk[-1]:
                    stack.pop()
                    brk.pop()
                    continue
                brk.append(x)
                break
            stack.append(j)
    return stack, brk


def _arc_primitives(c, rho, x0, x1):
    """Euclidean length, hyperbolic length and hyperbolic area above an arc."""
    u0 = np.clip((x0 - c) / rho, -1.0, 1.0)
    u1 = np.clip((x1 - c) / rho, -1.0, 1.0)
    asin = np.arcsin(u1) - np.arcsin(u0)
    with np.errstate(divide="ignore"):
        hyp = np.arctanh(u1) - np.arctanh(u0)
    return rho * asin, hyp, asin


def _envelope_1d(c, rho, a, b):
    """Core routine on ``[a, b]``; returns (index, left, right, gaps) arrays."""
    touch = (c + rho > a) & (c - rho < b)
    cand = np.nonzero(touch)[0]
    if cand.size == 0:
        return np.zeros(0, int), np.zeros(0), np.zeros(0), [(a, b)]
    keep = cand[_prefilter_nested(c[cand], rho[cand])]
    stack, brk = _line_envelope(c[keep], rho[keep])
    idx = keep[np.array(stack)]
    edges = np.concatenate(([-np.inf], brk, [np.inf]))
    left = np.maximum(edges[:-1], a)
    right = np.minimum(edges[1:], b)
    live = right > left
    idx, left, right = idx[live], left[live], right[live]
    gaps = []
    cc, rr = c[idx], rho[idx]
    # each piece is covered exactly on |x - c| < rho
    cov_l = np.maximum(left, cc - rr)
    cov_r = np.minimum(right, cc + rr)
    for l_, r_, cl, cr in zip(left, right, cov_l, cov_r):
        if cr <= cl:
            gaps.append((l_, r_))
            continue
        if cl > l_:
            gaps.append((l_, cl))
        if cr < r_:
            gaps.append((cr, r_))
    merged = []
    for g in gaps:
        if merged and g[0] <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], g[1]))
        else:
            merged.append(g)
    return idx, left, right, merged


def envelope_2d(sample: DepositionSample, interval=None, tie_tol: float = 1e-12) -> Envelope2D:
    """Upper envelope of the semicircles of a d=2 sample over ``interval``."""
    if sample.d != 2:
        raise ValueError("envelope_2d needs d = 2")
    a, b = (-sample.window_A, sample.window_A) if interval is None else map(float, interval)
    if not b > a:
        raise ValueError("empty interval")
    c = sample.centers[:, 0]
    rho = sample.rhos
    idx, left, right, gaps = _envelope_1d(c, rho, a, b)
    if gaps:
        raise Uncovered(f"uncovered sub-intervals: {gaps[:5]}", gaps)
    counters = {"degenerate_ties": int(np.sum(right - left <= tie_tol))}
    cc, rr = c[idx], rho[idx]
    eu, hyp, area = _arc_primitives(cc, rr, left, right)
    xs = right[:-1]
    zs = np.sqrt(np.maximum(rr[:-1] ** 2 - (xs - cc[:-1]) ** 2, 0.0))
    verts = np.column_stack([xs, zs]) if len(xs) else np.zeros((0, 2))
    pairs = np.column_stack([idx[:-1], idx[1:]]) if len(xs) else np.zeros((0, 2), int)
    ends = np.concatenate(([left[0]], right))
    owner = np.concatenate(([idx[0]], idx))
    hmin = float(np.sqrt(np.min(rho[owner] ** 2 - (ends - c[owner]) ** 2)))
    return Envelope2D((a, b), idx, left, right, verts, pairs, float(eu.sum()), float(hyp.sum()),
                      float(area.sum()), hmin, counters)


def envelope_2d_bruteforce(sample: DepositionSample, interval):
    """Reference envelope from all pairwise circle intersections (small samples only).

    Returns ``(vertices, pairs, euclidean_length)``.
    """
    a, b = map(float, interval)
    c = sample.centers[:, 0]
    rho = sample.rhos
    n = len(c)
    cand = [a, b]
    cand += [x for x in (c - rho) if a < x < b] + [x for x in (c + rho) if a < x < b]
    for i in range(n):
        for j in range(i + 1, n):
            if c[i] == c[j]:
                continue
            x = _radical_x(c[i], rho[i], c[j], rho[j])
            if a < x < b and rho[i] ** 2 - (x - c[i]) ** 2 > 0:
                cand.append(x)
    cand = np.unique(cand)

    def top(x):
        h2 = rho**2 - (x - c) ** 2
        return int(np.argmax(h2)), float(h2.max())

    mids = 0.5 * (cand[:-1] + cand[1:])
    owners = [top(m) for m in mids]
    if any(h <= 0 for _, h in owners):
        raise Uncovered("uncovered")
    verts, pairs, length = [], [], 0.0
    for k, (i, _) in enumerate(owners):
        length += float(_arc_primitives(c[i], rho[i], cand[k], cand[k + 1])[0])
        if k and owners[k - 1][0] != i:
            x = cand[k]
            j = owners[k - 1][0]
            verts.append((x, math.sqrt(max(rho[i] ** 2 - (x - c[i]) ** 2, 0.0))))
            pairs.append((j, i))
    return np.array(verts).reshape(-1, 2), np.array(pairs, dtype=int).reshape(-1, 2), length


# ------------------------------------------------------------ 3D vertices


@dataclass(frozen=True, eq=False)
class Vertices3D:
    positions: np.ndarray  # (m, 3): x, y, z
    triples: np.ndarray  # (m, 3) sphere indices
    min_height: float
    counters: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.positions)


def _triple_point(ci, ri, cj, rj, ck, rk):
    """Intersection above the base plane of three spheres, or ``None``."""
    m = 2.0 * np.array([cj - ci, ck - ci])
    rhs = np.array([
        (cj - ci) @ (cj - ci) - rj**2 + ri**2,
        (ck - ci) @ (ck - ci) - rk**2 + ri**2,
    ])
    det = np.linalg.det(m)
    if abs(det) < 1e-14 * max(1.0, np.abs(m).max() ** 2):
        return None
    y = ci + np.linalg.solve(m, rhs)
    z2 = ri**2 - (y - ci) @ (y - ci)
    return y, z2


def _edge_min_height(c, rho, p, axis, lo, hi):
    """Minimum envelope height along the segment ``p + t e_axis``, ``t`` in ``[lo, hi]``."""
    other = 1 - axis
    r2 = rho**2 - (c[:, other] - p[other]) ** 2
    ok = r2 > 0
    cc = c[ok, axis]
    rr = np.sqrt(r2[ok])
    idx, left, right, gaps = _envelope_1d(cc, rr, lo, hi)
    if gaps:
        return 0.0
    ends = np.concatenate(([left[0]], right))
    owner = np.concatenate(([idx[0]], idx))
    return float(np.sqrt(np.min(rr[owner] ** 2 - (ends - cc[owner]) ** 2)))


def vertices_3d(sample: DepositionSample, L: float | None = None) -> Vertices3D:
    """Vertices of the cell boundary above the box ``[-L, L]^2``.

    Vertices are the lower facets of the convex hull of the lifted points
    ``(x, |x|^2 - rho^2)`` whose dual point lies in the box above the base
    plane.  ``min_height`` is the lowest boundary point over the box, which
    certifies the ``rho_min`` truncation when it is ``>= rho_min``.
    """
    if sample.d != 3:
        raise ValueError("vertices_3d needs d = 3")
    L = sample.window_A if L is None else float(L)
    c, rho = sample.centers, sample.rhos
    counters = {"degenerate": 0}
    if len(rho) < 4:
        return vertices_3d_bruteforce(sample, L)
    # only spheres whose shadow meets the box can show up above it
    gap = np.maximum(np.abs(c) - L, 0.0)
    sel = np.nonzero(np.einsum("ij,ij->i", gap, gap) < rho**2)[0]
    cs, rs = c[sel], rho[sel]
    if len(sel) < 4:
        return vertices_3d_bruteforce(sample, L)
    lifted = np.column_stack([cs, np.einsum("ij,ij->i", cs, cs) - rs**2])
    try:
        hull = ConvexHull(lifted)
    except QhullError:
        return vertices_3d_bruteforce(sample, L)
    lower = hull.equations[:, 2] < -1e-12
    simp = hull.simplices[lower]
    ci, cj, ck = cs[simp[:, 0]], cs[simp[:, 1]], cs[simp[:, 2]]
    ri, rj, rk = rs[simp[:, 0]], rs[simp[:, 1]], rs[simp[:, 2]]
    u, v = cj - ci, ck - ci
    b0 = np.einsum("ij,ij->i", u, u) - rj**2 + ri**2
    b1 = np.einsum("ij,ij->i", v, v) - rk**2 + ri**2
    # 2 [u; v] y' = [b0; b1] with y = ci + y', by Cramer's rule
    det = 2 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    scale = np.maximum(np.abs(u).max(axis=1), np.abs(v).max(axis=1)) ** 2
    ok = np.abs(det) > 1e-14 * np.maximum(scale, 1.0)
    counters["degenerate"] = int(np.sum(~ok))
    with np.errstate(divide="ignore", invalid="ignore"):
        y = ci + np.column_stack([(b0 * v[:, 1] - u[:, 1] * b1), (u[:, 0] * b1 - b0 * v[:, 0])]) / det[:, None]
    dy = y - ci
    z2 = ri**2 - np.einsum("ij,ij->i", dy, dy)
    keep = ok & (z2 > 0) & np.all(np.abs(y) <= L, axis=1)
    pos = np.column_stack([y[keep], np.sqrt(z2[keep])])
    tri = np.sort(sel[simp[keep]], axis=1)
    edge_min = min(
        _edge_min_height(cs, rs, np.array(p), ax, -L, L)
        for ax, p in ((0, (0.0, -L)), (0, (0.0, L)), (1, (-L, 0.0)), (1, (L, 0.0)))
    )
    hmin = min(edge_min, float(pos[:, 2].min()) if len(pos) else np.inf)
    return Vertices3D(pos, tri, hmin, counters)


def vertices_3d_bruteforce(sample: DepositionSample, L: float) -> Vertices3D:
    """All-triples reference implementation (small samples only)."""
    c, rho = sample.centers, sample.rhos
    n = len(rho)
    pos, tri = [], []
    counters = {"degenerate": 0}
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                res = _triple_point(c[i], rho[i], c[j], rho[j], c[k], rho[k])
                if res is None:
                    counters["degenerate"] += 1
                    continue
                y, z2 = res
                if z2 <= 0 or np.any(np.abs(y) > L):
                    continue
                others = np.ones(n, dtype=bool)
                others[[i, j, k]] = False
                d2 = np.einsum("ij,ij->i", c[others] - y, c[others] - y) + z2
                if np.any(d2 < rho[others] ** 2):
                    continue
                pos.append((y[0], y[1], math.sqrt(z2)))
                tri.append((i, j, k))
    pos = np.array(pos).reshape(-1, 3)
    hmin = float(pos[:, 2].min()) if len(pos) else np.inf
    return Vertices3D(pos, np.array(tri, dtype=int).reshape(-1, 3), hmin, counters)


# ------------------------------------------------------------ batched samplers


def hole_batch(d: int, r: float, s, rng: np.random.Generator, ratio: float = 2.0**0.25):
    """Hole indicators for independent deposition samples with ``R_1 = s[i]``.

    Only half-spheres able to meet the hyperbolic ball ``B_r`` are generated:
    those need ``rho >= exp(-r)`` and ``rho^2 - 1 <= |x|^2 <= rho^2 + 2 rho sinh(r) - 1``.
    Each band draws centres uniformly in that shell and applies the exact
    geometric test, so no truncation is involved.  Returns a boolean array.
    """
    d = hg.check_dim(d)
    s = np.asarray(s, dtype=float)
    n = d - 1
    cb = hg.dim_constants(d).c_bold
    kappa = _unit_ball_volume(n)
    R, C = math.sinh(r), math.cosh(r)
    hole = np.ones(len(s), dtype=bool)
    if r == 0:
        # the ball reduces to the point (0,..,0,1), which no constrained sphere covers
        return hole
    a = math.exp(-r)
    smax = float(s.max()) if len(s) else 0.0
    while True:
        b = ratio * a
        r_in = math.sqrt(max(a * a - 1.0, 0.0))
        r_out = math.sqrt(b * b + 2 * b * R - 1.0)
        mass = cb * kappa * (r_out**n - r_in**n) * _band_mass_factor(a, b, d)
        act = np.nonzero(hole)[0]
        counts = rng.poisson(s[act] * mass)
        tot = int(counts.sum())
        if tot:
            rho = _band_rho(rng, tot, a, b, d)
            x = _sample_ball_shell(rng, tot, r_in, r_out, n)
            x2 = np.einsum("ij,ij->i", x, x)
            hit = (rho * rho <= 1.0 + x2) & (np.sqrt(x2 + C * C) <= rho + R)
            owner = np.repeat(act, counts)
            hole[owner[hit]] = False
        if residual_mass(d, smax, R, 1.0, b, "ball") < RESIDUAL_MASS:
            break
        a = b
    return hole


@dataclass(frozen=True, eq=False)
class HeightAngleBatch:
    H: np.ndarray
    sin2: np.ndarray
    uncovered: int
    uncertified: int


def height_angle_batch(d: int, s, rng: np.random.Generator, constrained: bool = False,
                       coverage: float = 40.0, ratio: float = 2.0) -> HeightAngleBatch:
    """Height and ``sin^2`` of the angle of the boundary above the origin for
    independent samples with ``R_1 = s[i]``.

    Replication ``i`` keeps spheres with ``rho >= (s_i/coverage)^(1/(d-1))``,
    so the point is left uncovered with probability ``exp(-coverage)``.
    Uncovered and uncertified (height below the truncation) replications
    are dropped from ``H`` and counted.
    """
    d = hg.check_dim(d)
    s = np.asarray(s, dtype=float)
    n = d - 1
    cb = hg.dim_constants(d).c_bold
    kappa = _unit_ball_volume(n)
    m = len(s)
    rho_min = (s / coverage) ** (1.0 / n)
    best = np.zeros(m)  # best squared height
    best_s2 = np.zeros(m)
    a = rho_min.copy()
    while True:
        b = ratio * a
        mass = cb * s * kappa * b**n * _band_mass_factor(a, b, d)
        counts = rng.poisson(mass)
        tot = int(counts.sum())
        if tot:
            owner = np.repeat(np.arange(m), counts)
            p = 2 - 2 * d
            u = rng.uniform(size=tot)
            ao, bo = a[owner], b[owner]
            rho = (ao**p - u * (ao**p - bo**p)) ** (1.0 / p)
            x = _sample_ball_shell(rng, tot, np.zeros(tot), bo, n)
            x2 = np.einsum("ij,ij->i", x, x)
            h2 = rho * rho - x2
            ok = h2 > 0
            if constrained:
                ok &= rho * rho <= 1.0 + x2
            o, hh, ss = owner[ok], h2[ok], h2[ok] / (rho[ok] ** 2)
            order = np.lexsort((hh, o))
            o, hh, ss = o[order], hh[order], ss[order]
            last = np.r_[o[1:] != o[:-1], True] if len(o) else np.zeros(0, bool)
            o, hh, ss = o[last], hh[last], ss[last]
            upd = hh > best[o]
            best[o[upd]] = hh[upd]
            best_s2[o[upd]] = ss[upd]
        if np.all(residual_mass(d, s, 0.0, 1.0, b, "ball") < RESIDUAL_MASS):
            break
        a = b
    covered = best > 0
    certified = covered & (best >= rho_min**2)
    return HeightAngleBatch(np.sqrt(best[certified]), best_s2[certified],
                            int(np.sum(~covered)), int(np.sum(covered & ~certified)))
