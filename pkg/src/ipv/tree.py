"""Ideal Poisson-Voronoi tessellation of the k-regular tree.

Vertices are words from the root: the first letter is one of ``k``
neighbours, every later letter one of the ``k - 1`` forward neighbours.
Boundary rays are infinite words of the same kind.  Nuclei are rays with
delays forming a Poisson process of intensity ``xi (k-1)^m`` on ``[m, m+1)``;
vertex ``v`` goes to the nucleus minimising ``h_ray(v) + delay`` where
``h`` is the horofunction vanishing at the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TreeConfig:
    k: int
    xi: float = 1.0
    ball_radius: int = 1
    delay_horizon: float | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 3:
            raise ValueError("k must be an integer >= 3")
        if not 1 <= self.xi < self.k - 1:
            raise ValueError("xi must lie in [1, k-1)")
        if int(self.ball_radius) != self.ball_radius or self.ball_radius < 0:
            raise ValueError("ball_radius must be a nonnegative integer")


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class Ray:
    """Uniform random ray, generated lazily from a 64-bit key."""

    k: int
    key: int

    def letter(self, i: int) -> int:
        m = self.k if i == 0 else self.k - 1
        h = _splitmix64((self.key ^ _splitmix64(i)) & MASK64)
        return ((h >> 11) * m) >> 53

    def prefix(self, n: int) -> tuple:
        return tuple(self.letter(i) for i in range(n))


@dataclass(frozen=True)
class TreeNucleus:
    ray: Ray
    delay: float


# ------------------------------------------------------------ delay process


def cumulative_intensity(cfg: TreeConfig, t):
    """``Lambda(t)``, the mean number of delays in ``(-inf, t]``."""
    q = cfg.k - 1
    t = np.asarray(t, dtype=float)
    m = np.floor(t)
    out = cfg.xi * q**m * (1.0 / (cfg.k - 2) + (t - m))
    return out if np.ndim(out) else float(out)


def inverse_cumulative_intensity(cfg: TreeConfig, y):
    q = cfg.k - 1
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("cumulative mass must be positive")
    m = np.floor(np.log((cfg.k - 2) * y / cfg.xi) / math.log(q))
    base = cfg.xi * q**m / (cfg.k - 2)
    # guard the floor against rounding at band edges
    m = np.where(y < base, m - 1, m)
    base = cfg.xi * q**m / (cfg.k - 2)
    m = np.where(y >= base * q, m + 1, m)
    base = cfg.xi * q**m / (cfg.k - 2)
    out = m + (y - base) / (cfg.xi * q**m)
    return out if np.ndim(out) else float(out)


def sample_tree_nuclei(cfg: TreeConfig, rng: np.random.Generator) -> list[TreeNucleus]:
    """Nuclei in increasing delay up to the certified horizon.

    Delays are ``Lambda^{-1}`` of the arrival times of a unit-rate process.
    Without an explicit ``delay_horizon`` sampling stops at the first delay
    exceeding ``D_1 + 2 R``; later nuclei cannot win a vertex of ``B_R``.
    """
    need = None
    nuclei: list[TreeNucleus] = []
    gamma = 0.0
    while True:
        gamma += rng.exponential()
        t = float(inverse_cumulative_intensity(cfg, gamma))
        key = int(rng.integers(0, 2**63, dtype=np.int64))
        if need is None:
            need = t + 2 * cfg.ball_radius
            if cfg.delay_horizon is not None and need > cfg.delay_horizon:
                raise ValueError(
                    f"delay_horizon {cfg.delay_horizon} below the certified bound {need:.4g}"
                )
        limit = need if cfg.delay_horizon is None else cfg.delay_horizon
        if t > limit:
            break
        nuclei.append(TreeNucleus(Ray(cfg.k, key), t))
    return nuclei


# ------------------------------------------------------------ geometry


def tree_horofunction(v, ray: Ray, depth_cap: int | None = None) -> int:
    """``|v| - 2 * (length of the common prefix of v and the ray)``."""
    v = tuple(v)
    cap = len(v) if depth_cap is None else depth_cap
    if cap < len(v):
        raise ValueError("depth_cap must be at least |v|")
    shared = 0
    for i, a in enumerate(v):
        if ray.letter(i) != a:
            break
        shared += 1
    return len(v) - 2 * shared


def ball_vertices(k: int, R: int) -> list[tuple]:
    """All words of length ``<= R`` in breadth-first order."""
    out = [()]
    for n in range(1, R + 1):
        for first in range(k):
            for rest in product(range(k - 1), repeat=n - 1):
                out.append((first, *rest))
    return out


def assign_cells(cfg: TreeConfig, nuclei: list[TreeNucleus], exhaustive: bool = False) -> dict:
    """Map each vertex of ``B_R`` to the 1-based index of its nucleus.

    Only nuclei with delay ``<= D_1 + 2R`` compete unless ``exhaustive``.
    """
    if not nuclei:
        raise ValueError("no nuclei")
    R = cfg.ball_radius
    delays = np.array([n.delay for n in nuclei])
    if cfg.delay_horizon is not None and delays[0] + 2 * R > cfg.delay_horizon:
        raise ValueError("uncertified horizon")
    if exhaustive:
        cand = range(len(nuclei))
    else:
        cand = range(int(np.searchsorted(delays, delays[0] + 2 * R, side="right")))
    prefixes = [nuclei[i].ray.prefix(R) for i in cand]
    out = {}
    for v in ball_vertices(cfg.k, R):
        best, arg = math.inf, -1
        for i, pre in zip(cand, prefixes):
            shared = 0
            for a, b in zip(v, pre):
                if a != b:
                    break
                shared += 1
            val = delays[i] + len(v) - 2 * shared
            if val < best:
                best, arg = val, i
        out[v] = arg + 1
    return out


def root_degree(assignment: dict, k: int) -> int:
    """Number of neighbours of the root sharing its cell."""
    home = assignment[()]
    return sum(assignment[(j,)] == home for j in range(k))


def cells_connected(assignment: dict) -> bool:
    """Each cell restricted to the ball is a subtree: exactly one vertex per
    cell has its parent outside the cell (or is the root)."""
    tops: dict = {}
    for v, c in assignment.items():
        if not v or assignment[v[:-1]] != c:
            tops[c] = tops.get(c, 0) + 1
    return all(n == 1 for n in tops.values())


def root_degree_sample(cfg: TreeConfig, rng: np.random.Generator) -> int:
    local = TreeConfig(cfg.k, cfg.xi, max(cfg.ball_radius, 1), cfg.delay_horizon)
    return root_degree(assign_cells(local, sample_tree_nuclei(local, rng)), cfg.k)
