"""Models of hyperbolic space and the few isometries the simulator needs.

Two models are used: the Poincare ball ``B_d`` (points are arrays with last
axis of length ``d`` and norm < 1) and the upper half-space ``U_d`` (last
coordinate is the height).  All functions broadcast over leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

NORM_TOL = 1e-12


@dataclass(frozen=True)
class DimConstants:
    d: int
    c_d: float
    omega_d: float
    c_bold: float


def check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


@lru_cache(maxsize=None)
def dim_constants(d: int) -> DimConstants:
    """``c_d = 2^(2-d) pi^(d/2) / Gamma(d/2)``, ``Omega_d = 2^(d-1) c_d`` and
    ``c_bold = 2(d-1)/c_d``."""
    d = check_dim(d)
    c_d = 2.0 ** (2 - d) * math.pi ** (d / 2) / math.gamma(d / 2)
    return DimConstants(d=d, c_d=c_d, omega_d=2.0 ** (d - 1) * c_d, c_bold=2 * (d - 1) / c_d)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere ``S_n`` in ``R^(n+1)`` (``S_0`` has 2 points)."""
    return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def _norm2(x):
    return np.einsum("...i,...i->...", x, x)


def _check_ball(*pts):
    for p in pts:
        if np.any(_norm2(p) >= 1.0):
            raise ValueError("point outside the open unit ball")


def uniform_sphere(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` iid uniform points on ``S_{d-1}`` via normalised Gaussians."""
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def poisson_kernel(z, theta, d: int | None = None):
    """``K(z, theta) = ((1 - |z|^2) / |z - theta|^2)^(d-1)``."""
    z = np.asarray(z, dtype=float)
    theta = np.asarray(theta, dtype=float)
    d = z.shape[-1] if d is None else check_dim(d)
    _check_ball(z)
    out = ((1.0 - _norm2(z)) / _norm2(z - theta)) ** (d - 1)
    return out if np.ndim(out) else float(out)


def kernel_upper_bound(z, d: int):
    """Uniform bound ``((1+|z|)/(1-|z|))^(d-1)`` on ``K(z, .)``."""
    r = np.sqrt(_norm2(np.asarray(z, dtype=float)))
    return ((1 + r) / (1 - r)) ** (d - 1)


def ball_distance(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_ball(x, y)
    out = 2 * np.arcsinh(np.sqrt(_norm2(x - y) / ((1 - _norm2(x)) * (1 - _norm2(y)))))
    return out if np.ndim(out) else float(out)


def halfspace_distance(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x[..., -1] <= 0) or np.any(y[..., -1] <= 0):
        raise ValueError("half-space point with nonpositive height")
    out = 2 * np.arcsinh(np.sqrt(_norm2(x - y)) / (2 * np.sqrt(x[..., -1] * y[..., -1])))
    return out if np.ndim(out) else float(out)


def cayley(p):
    """Generalised Cayley transform ``B_d -> U_d`` with origin -> (0,...,0,1)."""
    p = np.asarray(p, dtype=float)
    _check_ball(p)
    den = _norm2(p[..., :-1]) + (p[..., -1] - 1.0) ** 2
    out = np.empty_like(p)
    out[..., :-1] = 2 * p[..., :-1] / den[..., None]
    out[..., -1] = (1.0 - _norm2(p)) / den
    return out


def cayley_inverse(q):
    q = np.asarray(q, dtype=float)
    if np.any(q[..., -1] <= 0):
        raise ValueError("half-space point with nonpositive height")
    den = _norm2(q[..., :-1]) + (q[..., -1] + 1.0) ** 2
    out = np.empty_like(q)
    out[..., :-1] = 2 * q[..., :-1] / den[..., None]
    out[..., -1] = (_norm2(q) - 1.0) / den
    return out


def stereographic(theta):
    """Projection of ``S_{d-1}`` from the north pole onto the equatorial plane.

    The north pole itself goes to a vector of ``inf`` (point at infinity).
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(_norm2(theta) - 1.0) > 1e-10):
        raise ValueError("boundary direction must be a unit vector")
    gap = 1.0 - theta[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = theta[..., :-1] / gap[..., None]
    out = np.where((gap <= 0)[..., None], np.inf, out)
    return out


def stereographic_inverse(x):
    x = np.asarray(x, dtype=float)
    n2 = _norm2(x)
    out = np.empty(x.shape[:-1] + (x.shape[-1] + 1,))
    out[..., :-1] = 2 * x / (n2 + 1)[..., None]
    out[..., -1] = (n2 - 1) / (n2 + 1)
    return out


def _translate(a, x):
    """Ball Mobius map sending ``a`` to the origin (inverse is ``_translate(-a, .)``).

    Also valid for ``|x| = 1``, where it maps the sphere to itself.
    """
    a2 = a @ a
    diff = x - a
    num = (1 - a2) * diff - _norm2(diff)[..., None] * a
    den = 1 - 2 * (x @ a) + _norm2(x) * a2
    return num / den[..., None]


@dataclass(frozen=True, eq=False)
class Isometry:
    """``z -> rotation @ T_a(z)`` where ``T_a`` is the Mobius translation taking
    ``a = translation`` to the origin."""

    rotation: np.ndarray
    translation: np.ndarray

    @property
    def d(self) -> int:
        return self.rotation.shape[0]

    def __call__(self, z):
        return apply(self, z)


def identity(d: int) -> Isometry:
    return Isometry(np.eye(d), np.zeros(d))


def mobius_to_origin(p) -> Isometry:
    p = np.asarray(p, dtype=float)
    _check_ball(p)
    return Isometry(np.eye(p.shape[-1]), p.copy())


def apply(iso: Isometry, z):
    z = np.asarray(z, dtype=float)
    return _translate(iso.translation, z) @ iso.rotation.T


def apply_boundary(iso: Isometry, theta):
    theta = np.asarray(theta, dtype=float)
    out = apply(iso, theta)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def preimage_of_origin(iso: Isometry) -> np.ndarray:
    """``iso^{-1}(0)``, the point sent to the origin."""
    return iso.translation.copy()


def apply_inverse(iso: Isometry, w):
    w = np.asarray(w, dtype=float)
    return _translate(-iso.translation, w @ iso.rotation)


def _normal_form(forward, inverse, d: int) -> Isometry:
    # forward fixes nothing in general; a = forward^{-1}(0), and
    # forward o T_a^{-1} fixes 0, hence is orthogonal linear on the ball.
    a = inverse(np.zeros(d))
    probe = 0.5 * np.eye(d)
    rot = forward(_translate(-a, probe)).T / 0.5
    return Isometry(rot, a)


def compose(psi: Isometry, phi: Isometry) -> Isometry:
    """``psi o phi``."""
    return _normal_form(
        lambda z: apply(psi, apply(phi, z)),
        lambda w: apply_inverse(phi, apply_inverse(psi, w)),
        psi.d,
    )


def inverse(iso: Isometry) -> Isometry:
    return _normal_form(lambda w: apply_inverse(iso, w), lambda z: apply(iso, z), iso.d)


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_isometry(d: int, rng: np.random.Generator, max_norm: float = 0.9) -> Isometry:
    a = rng.standard_normal(d)
    a *= max_norm * rng.uniform() ** (1.0 / d) / np.linalg.norm(a)
    return Isometry(random_rotation(d, rng), a)


# ---------------------------------------------------------------- volume growth


def _sinh_power_integral(d: int, r: float) -> float:
    val, _ = integrate.quad(lambda t: math.sinh(t) ** (d - 1), 0.0, r, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def volume_growth(d: int, r):
    """Volume of the hyperbolic ball of radius ``r``: ``Omega_d int_0^r sinh^(d-1)``."""
    d = check_dim(d)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    if d == 2:
        out = 4 * math.pi * np.sinh(r / 2) ** 2
    elif d == 3:
        # series below 1e-2 avoids the cancellation in sinh(2r) - 2r
        ser = math.pi * (8 * r**3 / 6 + 32 * r**5 / 120 + 128 * r**7 / 5040)
        out = np.where(r < 1e-2, ser, math.pi * (np.sinh(2 * r) - 2 * r))
    else:
        om = dim_constants(d).omega_d
        out = om * np.vectorize(lambda x: _sinh_power_integral(d, x), otypes=[float])(r)
    return out if np.ndim(out) else float(out)


def volume_growth_inverse(d: int, v):
    """Radius whose ball has volume ``v`` (bisection + Newton polish)."""
    d = check_dim(d)
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("volume must be nonnegative")
    if d == 2:
        out = 2 * np.arcsinh(np.sqrt(v / (4 * math.pi)))
        return out if np.ndim(out) else float(out)
    om = dim_constants(d).omega_d
    flat = np.atleast_1d(v).astype(float).ravel()
    lo = np.zeros_like(flat)
    hi = np.ones_like(flat)
    while True:
        short = volume_growth(d, hi) < flat
        if not np.any(short):
            break
        hi = np.where(short, 2 * hi, hi)
    r = 0.5 * (lo + hi)
    for _ in range(80):
        f = volume_growth(d, r) - flat
        lo = np.where(f < 0, r, lo)
        hi = np.where(f >= 0, r, hi)
        deriv = om * np.sinh(r) ** (d - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = r - f / deriv
        inside = (newton > lo) & (newton < hi) & np.isfinite(newton)
        r_new = np.where(inside, newton, 0.5 * (lo + hi))
        if np.all(np.abs(r_new - r) <= 1e-15 * (1 + r)):
            r = r_new
            break
        r = r_new
    r = np.where(flat == 0, 0.0, r)
    out = r.reshape(np.shape(v))
    return out if np.ndim(out) else float(out)
