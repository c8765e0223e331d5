"""The corona point process of ideal nuclei and the separation field.

A nucleus is a pair (angle on ``S_{d-1}``, radius ``R > 0``); the radius is
``(c_d/(d-1)) exp((d-1) D)`` for its delay ``D``.  The radii of the limiting
process form a unit-rate Poisson process on ``R_+`` and the angles are iid
uniform.  A point ``z`` of the ball is in the cell of the nucleus minimising
the separation ``R / K(z, theta)``.

Nuclei are numbered from 1 in increasing order of radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hypgeom as hg

MAX_EXPECTED_POINTS = 1e8


@dataclass(frozen=True, eq=False)
class CoronaPoint:
    theta: np.ndarray
    R: float
    D: float


@dataclass(frozen=True, eq=False)
class NucleusProcess:
    """First ``n`` nuclei of the corona process, sorted by radius."""

    d: int
    thetas: np.ndarray
    radii: np.ndarray
    delays: np.ndarray
    seed: tuple = ()

    def __len__(self) -> int:
        return len(self.radii)

    def __getitem__(self, index: int) -> CoronaPoint:
        """Nucleus number ``index`` (1-based)."""
        if not 1 <= index <= len(self):
            raise IndexError(index)
        i = index - 1
        return CoronaPoint(self.thetas[i], float(self.radii[i]), float(self.delays[i]))

    def nuclei(self) -> list[CoronaPoint]:
        return [self[i] for i in range(1, len(self) + 1)]


@dataclass(frozen=True)
class SeparationValue:
    value: float
    argmin_index: int
    truncation_unsafe: bool = False


class TruncationUnsafe(RuntimeError):
    """The finite process ran out before the argmin could be certified."""


def delay_of_radius(R, d: int):
    c = hg.dim_constants(d).c_d
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise ValueError("corona radius must be positive")
    out = np.log((d - 1) * R / c) / (d - 1)
    return out if np.ndim(out) else float(out)


def radius_of_delay(D, d: int):
    c = hg.dim_constants(d).c_d
    out = c / (d - 1) * np.exp((d - 1) * np.asarray(D, dtype=float))
    return out if np.ndim(out) else float(out)


def make_process(thetas, radii, d: int | None = None, seed: tuple = ()) -> NucleusProcess:
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    d = thetas.shape[1] if d is None else d
    order = np.argsort(radii, kind="stable")
    radii = radii[order]
    if len(radii) > 1 and np.any(np.diff(radii) <= 0):
        raise ValueError("corona radii must be distinct")
    return NucleusProcess(d, thetas[order], radii, delay_of_radius(radii, d) if len(radii) else radii, seed)


def sample_nuclei(d: int, n: int, rng: np.random.Generator, seed: tuple = ()) -> NucleusProcess:
    """First ``n`` nuclei: radii are partial sums of Exp(1), angles uniform."""
    d = hg.check_dim(d)
    if n < 0:
        raise ValueError("n must be >= 0")
    radii = np.cumsum(rng.exponential(1.0, n))
    thetas = hg.uniform_sphere(n, d, rng)
    delays = delay_of_radius(radii, d) if n else np.empty(0)
    return NucleusProcess(d, thetas, radii, np.atleast_1d(delays), seed)


def separation(z, nucleus: CoronaPoint, d: int | None = None):
    z = np.asarray(z, dtype=float)
    d = z.shape[-1] if d is None else d
    out = nucleus.R / hg.poisson_kernel(z, nucleus.theta, d)
    return out if np.ndim(out) else float(out)


def separation_field_many(zs, proc: NucleusProcess, exhaustive: bool = False, chunk: int = 64):
    """Vectorised separation field at the points ``zs`` (shape ``(m, d)``).

    Returns ``(values, indices, unsafe)`` with 1-based indices.  Unless
    ``exhaustive``, nuclei are scanned in chunks of increasing radius and a
    point stops as soon as the next radius exceeds ``s* * Kmax(z)``, which
    no later nucleus can beat since ``K(z, .) <= Kmax(z)``.
    """
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    if len(proc) == 0:
        raise ValueError("empty nucleus process")
    d = proc.d
    m = len(zs)
    one_minus = 1.0 - np.einsum("ij,ij->i", zs, zs)
    if np.any(one_minus <= 0):
        raise ValueError("point outside the open unit ball")
    kmax = hg.kernel_upper_bound(zs, d)
    best = np.full(m, np.inf)
    arg = np.zeros(m, dtype=np.int64)
    active = np.ones(m, dtype=bool)
    n = len(proc)
    step = n if exhaustive else chunk
    for start in range(0, n, step):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        stop = min(start + step, n)
        th = proc.thetas[start:stop]
        # |z - theta|^2 = 2 - (1 - |z|^2) - 2 z.theta for unit theta
        diff2 = 2.0 - one_minus[idx, None] - 2 * zs[idx] @ th.T
        kern = (one_minus[idx, None] / diff2) ** (d - 1)
        sep = proc.radii[start:stop][None, :] / kern
        j = np.argmin(sep, axis=1)
        v = sep[np.arange(idx.size), j]
        better = v < best[idx]
        best[idx[better]] = v[better]
        arg[idx[better]] = start + j[better] + 1
        if not exhaustive and stop < n:
            done = proc.radii[stop] > best[idx] * kmax[idx]
            active[idx[done]] = False
    if exhaustive:
        unsafe = np.zeros(m, dtype=bool)
    else:
        unsafe = proc.radii[-1] < best * kmax
    return best, arg, unsafe


def separation_field(z, proc: NucleusProcess, exhaustive: bool = False) -> SeparationValue:
    vals, idx, unsafe = separation_field_many(np.asarray(z, dtype=float)[None, :], proc, exhaustive)
    return SeparationValue(float(vals[0]), int(idx[0]), bool(unsafe[0]))


def cell_of(z, proc: NucleusProcess, strict: bool = False) -> int:
    """1-based index of the nucleus whose cell contains ``z`` (smallest index on ties).

    With ``strict`` an uncertified answer raises :class:`TruncationUnsafe`.
    """
    sv = separation_field(z, proc)
    if strict and sv.truncation_unsafe:
        raise TruncationUnsafe("process exhausted before the argmin was certified; sample more nuclei")
    return sv.argmin_index


def cell_membership(z, i: int, proc: NucleusProcess, rtol: float = 1e-12) -> bool:
    """Closed-cell membership: ``R_i/K(z,theta_i) <= min_j R_j/K(z,theta_j)``.

    ``rtol`` absorbs rounding between the two evaluations of the same value.
    """
    sv = separation_field(z, proc)
    if sv.argmin_index == i:
        return True
    return bool(separation(z, proc[i], proc.d) <= sv.value * (1.0 + rtol))


def mobius_corona(iso: hg.Isometry, nucleus: CoronaPoint) -> CoronaPoint:
    """Action of an isometry on a corona point: ``(phi(theta), R / K(phi^{-1}(0), theta))``."""
    d = iso.d
    k = hg.poisson_kernel(hg.preimage_of_origin(iso), nucleus.theta, d)
    R = nucleus.R / k
    return CoronaPoint(hg.apply_boundary(iso, nucleus.theta), R, delay_of_radius(R, d))


def mobius_process(iso: hg.Isometry, proc: NucleusProcess):
    """Image of a finite process; returns ``(new_process, order)`` where
    ``order[j]`` is the 0-based position in ``proc`` of the new nucleus ``j+1``."""
    d = proc.d
    k = hg.poisson_kernel(hg.preimage_of_origin(iso)[None, :], proc.thetas, d)
    radii = proc.radii / k
    thetas = hg.apply_boundary(iso, proc.thetas)
    order = np.argsort(radii, kind="stable")
    new = NucleusProcess(d, thetas[order], radii[order], delay_of_radius(radii[order], d), proc.seed)
    return new, order


def bisector_halfspace(r1: float, C, r: float, d: int):
    """Bisector of nucleus ``(infinity, r1)`` and ``(Ste^{-1}(C), r)`` in the half-space.

    It is the half-sphere centred at ``C`` with radius
    ``sqrt(1 + |C|^2) * (r1/r)^(1/(2(d-1)))``.
    """
    from .origincell import HalfSphere

    if r1 <= 0 or r <= 0:
        raise ValueError("corona radii must be positive")
    C = np.atleast_1d(np.asarray(C, dtype=float))
    rho = math.sqrt(1.0 + float(C @ C)) * (r1 / r) ** (1.0 / (2 * (d - 1)))
    return HalfSphere(C, rho)


# ------------------------------------------------------------- finite intensity


@dataclass(frozen=True, eq=False)
class FinitePPPSample:
    """PPP of intensity ``lambda^(d-1) Vol`` inside the ball of radius ``r_max``."""

    d: int
    lam: float
    r_max: float
    points: np.ndarray  # ball-model coordinates, sorted by distance to the origin
    distances: np.ndarray = field(repr=False)


def sample_finite_ppp(d: int, lam: float, r_max: float, rng: np.random.Generator) -> FinitePPPSample:
    d = hg.check_dim(d)
    if lam <= 0 or r_max <= 0:
        raise ValueError("lambda and r_max must be positive")
    total = lam ** (d - 1) * hg.volume_growth(d, r_max)
    if total > MAX_EXPECTED_POINTS:
        raise ValueError(f"expected {total:.3g} points; use a smaller r_max")
    n = rng.poisson(total)
    u = rng.uniform(size=n)
    dist = np.sort(np.atleast_1d(hg.volume_growth_inverse(d, u * hg.volume_growth(d, r_max))))
    dist = np.minimum(dist, r_max)
    pts = np.tanh(dist / 2)[:, None] * hg.uniform_sphere(n, d, rng)
    return FinitePPPSample(d, lam, r_max, pts, dist)


def empirical_delays(sample: FinitePPPSample, lam: float | None = None) -> np.ndarray:
    """``d(o, X_i) - log(1/lambda)`` for every point, in increasing order."""
    lam = sample.lam if lam is None else lam
    return sample.distances - math.log(1.0 / lam)


def first_delay_survival(t, d: int, lam: float | None = None):
    """``P(D_1 > t)``; exact at intensity ``lam`` or the ``lam -> 0`` limit when ``None``."""
    t = np.asarray(t, dtype=float)
    if lam is None:
        c = hg.dim_constants(d).c_d
        out = np.exp(-c / (d - 1) * np.exp((d - 1) * t))
    else:
        r = np.maximum(t + math.log(1.0 / lam), 0.0)
        out = np.exp(-(lam ** (d - 1)) * hg.volume_growth(d, r))
    return out if np.ndim(out) else float(out)
