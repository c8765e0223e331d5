"""Closed forms and quadratures for the laws of the typical cell."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize, special

from . import hypgeom as hg

NU2 = 3 * math.pi / 4
NU3 = 2.783  # reference value, three decimals


def _vectorize(f, x):
    x = np.asarray(x, dtype=float)
    out = np.vectorize(f, otypes=[float])(x)
    return out if np.ndim(out) else float(out)


# ------------------------------------------------------------------ hole law


def _one_plus_I_quad(d: int, r: float) -> float:
    """Radial integral for ``1 + I_d(r)``; also defined (analytically) for ``r < 0``."""
    ch, sh = math.cosh(r), math.sinh(r)

    def f(t):
        return t ** (d - 2) / (math.hypot(ch, t) - sh) ** (2 * d - 2)

    split = 1.0 + ch
    v1, _ = integrate.quad(f, 0.0, split, epsabs=0.0, epsrel=1e-13, limit=200)
    v2, _ = integrate.quad(f, split, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return hg.sphere_area(d - 2) / hg.dim_constants(d).c_d * (v1 + v2)


def _one_plus_I_closed_2d(r):
    return (4 * np.arctan(np.exp(r)) * np.cosh(r) ** 2 + 2 * np.sinh(r)) / math.pi


def I_d(d: int, r, method: str = "auto"):
    """``I_d(r)``: ``P(hole | R_1 = s) = exp(-s I_d(r))``."""
    d = hg.check_dim(d)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    if d == 2 and method != "quad":
        out = _one_plus_I_closed_2d(r) - 1.0
        return out if np.ndim(out) else float(out)
    return _vectorize(lambda x: _one_plus_I_quad(d, x) - 1.0, r)


def hole_prob(d: int, r, s: float | None = None):
    """Conditional (``s`` given) or averaged probability that ``B_r(o)`` lies in the cell of ``o``."""
    i = np.asarray(I_d(d, r))
    out = 1.0 / (1.0 + i) if s is None else np.exp(-s * i)
    return out if np.ndim(out) else float(out)


def hole_prob_2d_closed(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(over="ignore"):
        out = math.pi / (4 * np.arctan(np.exp(r)) * np.cosh(r) ** 2 + 2 * np.sinh(r))
    return out if np.ndim(out) else float(out)


def hole_prob_3d_closed(r):
    r = np.asarray(r, dtype=float)
    out = 3 * np.exp(-2 * r) / (2 + np.exp(2 * r))
    return out if np.ndim(out) else float(out)


def hole_tail_2d(r):
    """``P(d(o, boundary of the cell) > r)`` averaged over ``R_1``, d = 2."""
    return hole_prob_2d_closed(r)


def hole_density_2d(r):
    r = np.asarray(r, dtype=float)
    # numerator and denominator divided by cosh^4 r, so nothing overflows
    e = np.exp(-np.abs(r))
    sech = 2 * e / (1 + e * e)
    th = np.tanh(r)
    at = math.pi / 2 - np.arctan(np.exp(-r))  # arctan(e^r)
    out = math.pi * (2 * at * th + sech) * sech**2 / (th * sech + 2 * at) ** 2
    return out if np.ndim(out) else float(out)


def hole_mean_2d() -> float:
    v, _ = integrate.quad(hole_tail_2d, 0.0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
    return v


def hole_median_2d() -> float:
    return optimize.brentq(lambda r: hole_tail_2d(r) - 0.5, 0.0, 5.0, xtol=1e-15)


def hole_law_slope_at_zero(d: int, h: float = 1e-5) -> float:
    """``-d/dr`` of the averaged hole probability at 0 by central differences.

    The radial integral extends smoothly to ``r < 0``, which provides the
    left point of the stencil.
    """
    d = hg.check_dim(d)
    return -(1.0 / _one_plus_I_quad(d, h) - 1.0 / _one_plus_I_quad(d, -h)) / (2 * h)


def isoperimetric_constant(d: int) -> float:
    d = hg.check_dim(d)
    return 2 ** (d - 1) * (d - 1) * math.gamma(d / 2) ** 2 / (math.sqrt(math.pi) * math.gamma(d - 0.5))


def isoperimetric_asymptote(d: int) -> float:
    return math.sqrt(2) * d - 9 / (4 * math.sqrt(2))


# ------------------------------------------------------------ hypergeometric


def gauss_2f1(a: float, b: float, c: float, x: float, tol: float = 1e-15, max_terms: int = 10**6) -> float:
    """Gauss hypergeometric function for ``0 <= x < 1``.

    Direct power series; above ``x = 0.5`` the connection formula to ``1 - x``
    is used when ``c - a - b`` is not an integer.
    """
    if c <= 0 and float(c).is_integer():
        raise ValueError("c must not be a nonpositive integer")
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    g = c - a - b
    if x > 0.5 and not float(g).is_integer():
        y = 1.0 - x
        t1 = special.gamma(c) * special.gamma(g) * special.rgamma(c - a) * special.rgamma(c - b)
        t2 = special.gamma(c) * special.gamma(-g) * special.rgamma(a) * special.rgamma(b)
        out = 0.0
        if t1 != 0:
            out += t1 * _series_2f1(a, b, 1 - g, y, tol, max_terms)
        if t2 != 0:
            out += t2 * y**g * _series_2f1(c - a, c - b, 1 + g, y, tol, max_terms)
        return float(out)
    return _series_2f1(a, b, c, x, tol, max_terms)


def _series_2f1(a, b, c, x, tol, max_terms):
    term = 1.0
    total = 1.0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if term == 0 or (abs(term) <= tol * abs(total) and n > 2):
            return total
    raise RuntimeError("2F1 series did not converge")


def one_plus_I_hypergeometric(d: int, r: float) -> float:
    """``1 + I_d(r)`` through two Gauss functions of ``tanh^2 r``."""
    d = hg.check_dim(d)
    x = math.tanh(r) ** 2
    first = gauss_2f1((d - 1) / 2, d - 0.5, 0.5, x)
    second = isoperimetric_constant(d) * math.tanh(r) * gauss_2f1(d / 2, d, 1.5, x)
    return (first + second) / math.cosh(r) ** (d - 1)


# ------------------------------------------------------------ heights, angles


def height_cdf(d: int, s: float, h):
    h = np.asarray(h, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(h > 0, np.exp(-s / np.where(h > 0, h, 1.0) ** (d - 1)), 0.0)
    return out if np.ndim(out) else float(out)


def height_cdf_avg(d: int, h):
    h = np.asarray(h, dtype=float)
    p = np.where(h > 0, np.maximum(h, 0.0) ** (d - 1), 0.0)
    out = p / (1 + p)
    return out if np.ndim(out) else float(out)


def angle_density(d: int, theta):
    theta = np.asarray(theta, dtype=float)
    k = 2**d * math.gamma(d / 2) / (math.sqrt(math.pi) * math.gamma((d - 1) / 2))
    out = k * np.sin(theta) ** d * np.cos(theta) ** (d - 2)
    return out if np.ndim(out) else float(out)


# ------------------------------------------------------------ vertices


def nu_d_mc(d: int, n_samples: int, rng: np.random.Generator, chunk: int = 10**6):
    """Monte-Carlo estimate of ``nu_d``; returns ``(estimate, stderr)``.

    With ``v_i = sin^2 phi_i`` the integrand over ``[0,1]^d x (S_{d-2})^d`` is
    ``prod(2 sin cos (sin cos)^(d-2))(phi_i) * |det[tan phi_i | u_i]|``
    where row ``i`` of the ``d x d`` matrix is ``(tan phi_i, u_i)``.
    """
    d = hg.check_dim(d)
    if n_samples < 2:
        raise ValueError("need at least two samples")
    scale = (hg.sphere_area(d - 2) * math.pi / 4) ** d
    s1 = s2 = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        phi = rng.uniform(0.0, math.pi / 2, size=(m, d))
        sc = np.sin(phi) * np.cos(phi)
        w = np.prod(2 * sc ** (d - 1), axis=1)
        if d == 2:
            u = np.where(rng.uniform(size=(m, d, 1)) < 0.5, -1.0, 1.0)
        else:
            g = rng.standard_normal((m, d, d - 1))
            u = g / np.linalg.norm(g, axis=2, keepdims=True)
        mat = np.concatenate([np.tan(phi)[:, :, None], u], axis=2)
        x = w * np.abs(np.linalg.det(mat))
        s1 += float(x.sum())
        s2 += float((x * x).sum())
        done += m
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return scale * mean, scale * math.sqrt(var / n_samples)


def _nu(d: int, nu: float | None) -> float:
    if nu is not None:
        return nu
    if d == 2:
        return NU2
    if d == 3:
        return NU3
    raise ValueError("pass nu explicitly for d > 3 (see nu_d_mc)")


def vertex_intensity(d: int, z, s: float | None = None, nu: float | None = None):
    """Density of vertices w.r.t. ``dx dz`` (conditional on ``s`` or averaged)."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("z must be positive")
    cb = hg.dim_constants(d).c_bold
    nu = _nu(d, nu)
    if s is None:
        out = cb**d * nu / (z * (1 + z ** (d - 1)) ** (d + 1))
    else:
        out = (cb * s) ** d / math.factorial(d) * nu * np.exp(-s / z ** (d - 1)) / z ** (d * d)
    return out if np.ndim(out) else float(out)


def vertices_per_unit(d: int, s: float, nu: float | None = None) -> float:
    """Vertices per unit horizontal volume, ``c_bold^d nu_d / ((d-1) s)``."""
    cb = hg.dim_constants(d).c_bold
    return cb**d * _nu(d, nu) / ((d - 1) * s)


def boundary_length_per_unit_2d(s: float) -> float:
    """Hyperbolic length of the cell boundary per unit horizontal length (d=2)."""
    return 4 / (math.pi * s)


def mean_edge_length_2d() -> float:
    return 4 / 3


def mean_face_area_3d(nu3: float = NU3) -> float:
    return math.pi**3 / (12 * nu3)


# ------------------------------------------------------------ trees


def tree_root_degree_pmf(k: int, j: int) -> float:
    if k < 3 or int(k) != k:
        raise ValueError("k must be an integer >= 3")
    if not 1 <= j <= k or int(j) != j:
        raise ValueError("j must be an integer in [1, k]")
    prod = 1.0
    for i in range(j, k):
        prod *= 1 + 1 / (i * (k - 2))
    return 1 / ((k - 2) * (j - 1) + 1) / prod
