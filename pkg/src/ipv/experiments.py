"""Monte-Carlo experiments and their reports.

Every experiment splits its replications into fixed-size chunks; chunk
``i`` draws from the stream ``(seed, i)`` and the partial results are
combined in chunk order, so reports do not depend on the number of workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import analytic as an
from . import corona as co
from . import hypgeom as hg
from . import origincell as oc
from . import stats
from . import tree as tr
from .export import dumps
from .rng import chunk_sizes, stream

ALLOWED_PARAMS = {"r", "s", "lambda", "window_A", "rho_min", "reps", "n_nuclei", "k", "xi", "grid", "seed"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: int = 2
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}")
        bad = set(self.params) - ALLOWED_PARAMS
        if bad:
            raise ConfigError(sorted(bad)[0], "unknown parameter")
        if self.params.get("seed") is None:
            raise ConfigError("seed", "a seed is mandatory")
        try:
            hg.check_dim(self.d)
        except ValueError as e:
            raise ConfigError("d", str(e)) from None


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    estimate: float
    stderr: float
    analytic: float | None = None
    ks: dict | None = None
    counters: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def z_score(self):
        if self.analytic is None or not self.stderr:
            return None
        return (self.estimate - self.analytic) / self.stderr

    def to_dict(self, stable: bool = False) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "analytic": self.analytic,
            "z_score": self.z_score,
            "ks": self.ks,
            "counters": self.counters,
            "runtime_seconds": 0.0 if stable else self.runtime_seconds,
            "details": self.details,
        }

    def to_json(self, stable: bool = False) -> str:
        return dumps(self.to_dict(stable))


def _get(cfg: ExperimentConfig, name, default):
    v = cfg.params.get(name, default)
    return default if v is None and default is not None else v


def _run_chunks(func, cfg: ExperimentConfig, total: int, chunk: int, workers: int, *extra):
    sizes = chunk_sizes(total, chunk)
    args = [(cfg.d, cfg.params, i, n, *extra) for i, n in enumerate(sizes)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(func, *zip(*args)))
    return [func(*a) for a in args]


# ------------------------------------------------------------ hole probability


def _hole_chunk(d, params, sid, n):
    rng = stream(params["seed"], sid)
    s = params.get("s")
    svals = rng.exponential(size=n) if s is None else np.full(n, float(s))
    return int(oc.hole_batch(d, float(params.get("r", 1.0)), svals, rng).sum())


def _hole(cfg, workers):
    reps = int(_get(cfg, "reps", 100_000))
    r = float(_get(cfg, "r", 1.0))
    s = cfg.params.get("s")
    hits = sum(_run_chunks(_hole_chunk, cfg, reps, 10_000, workers))
    p = hits / reps
    return ExperimentReport(
        cfg.experiment, {}, p, math.sqrt(max(p * (1 - p), 1.0 / reps) / reps),
        an.hole_prob(cfg.d, r, s), None, {"truncation": 0},
        details={"holes": hits, "reps": reps},
    )


# ------------------------------------------------------------ height / angle


def _ha_chunk(d, params, sid, n):
    rng = stream(params["seed"], sid)
    s = params.get("s", 1.0)
    svals = rng.exponential(size=n) if s is None else np.full(n, float(s))
    b = oc.height_angle_batch(d, svals, rng)
    return b.H, b.sin2, b.uncovered, b.uncertified


def _height_angle(cfg, workers):
    d = cfg.d
    reps = int(_get(cfg, "reps", 10_000))
    s = cfg.params.get("s", 1.0)
    parts = _run_chunks(_ha_chunk, cfg, reps, 2_500, workers)
    H = np.concatenate([p[0] for p in parts])
    sin2 = np.concatenate([p[1] for p in parts])
    counters = {"uncovered": sum(p[2] for p in parts), "uncertified": sum(p[3] for p in parts)}
    angle = stats.ks_test(sin2, sps.beta((d + 1) / 2, (d - 1) / 2).cdf)
    details = {
        "angle_ks": {"stat": angle.statistic, "p": angle.p_value},
        "spearman_H_angle": stats.spearman(H, sin2),
    }
    if d == 2:
        m, se = stats.mean_stderr(1.0 / np.sqrt(sin2))
        details["mean_inv_sin_theta"] = {"estimate": m, "stderr": se, "analytic": 4 / math.pi}
    if s is None:
        u = H ** (d - 1) / (1 + H ** (d - 1))
        est, se = stats.mean_stderr(u)
        height = stats.ks_test(H, lambda h: an.height_cdf_avg(d, h))
        analytic = 0.5
    else:
        x = 1.0 / H ** (d - 1)
        est, se = stats.mean_stderr(x)
        height = stats.ks_test(x, lambda t: 1.0 - np.exp(-float(s) * t))
        analytic = 1.0 / float(s)
    return ExperimentReport(cfg.experiment, {}, est, se, analytic,
                            {"stat": height.statistic, "p": height.p_value}, counters, details=details)


# ------------------------------------------------------------ envelopes


def _default_rho_min(d, s):
    return min((s / 25.0) ** (1.0 / (d - 1)), 0.5)


def _envelope_chunk(d, params, sid, n):
    rng = stream(params["seed"], sid)
    s = float(params.get("s", 1.0))
    A = float(params.get("window_A", 100.0 if d == 2 else 20.0))
    rho_min = params.get("rho_min") or _default_rho_min(d, s)
    rows = []
    uncovered = uncertified = 0
    for _ in range(n):
        sample = oc.sample_deposition(d, s, A, rho_min, False, rng)
        if d == 2:
            try:
                env = oc.envelope_2d(sample)
            except oc.Uncovered:
                uncovered += 1
                continue
            uncertified += env.min_height < rho_min
            rows.append((len(env.vertices), env.hyperbolic_length, env.hyperbolic_area_above))
        else:
            v = oc.vertices_3d(sample, A)
            uncertified += v.min_height < rho_min
            rows.append((len(v), 0.0, 0.0))
    return rows, uncovered, uncertified


def _envelope_runs(cfg, workers, default_reps):
    reps = int(_get(cfg, "reps", default_reps))
    parts = _run_chunks(_envelope_chunk, cfg, reps, 1, workers)
    rows = np.array([r for p in parts for r in p[0]], dtype=float).reshape(-1, 3)
    counters = {"uncovered": sum(p[1] for p in parts), "uncertified": int(sum(p[2] for p in parts))}
    return rows, counters


def _vertex_intensity(cfg, workers):
    d = cfg.d
    if d not in (2, 3):
        raise ConfigError("d", "vertex-intensity supports d = 2 and 3")
    s = float(_get(cfg, "s", 1.0))
    A = float(_get(cfg, "window_A", 100.0 if d == 2 else 20.0))
    rows, counters = _envelope_runs(cfg, workers, 50 if d == 2 else 10)
    per_unit = rows[:, 0] / (2 * A) ** (d - 1)
    est, se = stats.mean_stderr(per_unit)
    details = {"vertices_total": int(rows[:, 0].sum()), "runs": len(rows)}
    return ExperimentReport(cfg.experiment, {}, est, se, an.vertices_per_unit(d, s), None, counters,
                            details=details)


def _edge_length(cfg, workers):
    if cfg.d != 2:
        raise ConfigError("d", "edge-length is defined for d = 2")
    s = float(_get(cfg, "s", 1.0))
    A = float(_get(cfg, "window_A", 100.0))
    rows, counters = _envelope_runs(cfg, workers, 50)
    est, se = stats.ratio_stderr(rows[:, 1], rows[:, 0])
    lpu, lpu_se = stats.mean_stderr(rows[:, 1] / (2 * A))
    details = {
        "length_per_unit": {"estimate": lpu, "stderr": lpu_se, "analytic": an.boundary_length_per_unit_2d(s)},
        "vertices_total": int(rows[:, 0].sum()),
    }
    return ExperimentReport(cfg.experiment, {}, est, se, an.mean_edge_length_2d(), None, counters,
                            details=details)


def _length_area(cfg, workers):
    if cfg.d != 2:
        raise ConfigError("d", "length-area is defined for d = 2")
    rows, counters = _envelope_runs(cfg, workers, 50)
    est, se = stats.ratio_stderr(rows[:, 1], rows[:, 2])
    return ExperimentReport(cfg.experiment, {}, est, se, 4 / math.pi, None, counters)


# ------------------------------------------------------------ covering


def _covering_chunk(d, params, sid, n):
    rng = stream(params["seed"], sid)
    out = []
    for _ in range(n):
        sample = oc.sample_deposition(d, float(params.get("s", 1.0)), float(params.get("window_A", 5.0)),
                                      float(params.get("rho_min", 0.01)), False, rng)
        out.append(oc.covering_check(sample, float(params.get("grid", 0.01))))
    return out


def _covering(cfg, workers):
    reps = int(_get(cfg, "reps", 100))
    s = float(_get(cfg, "s", 1.0))
    rho_min = float(_get(cfg, "rho_min", 0.01))
    fr = np.array([f for p in _run_chunks(_covering_chunk, cfg, reps, 10, workers) for f in p])
    est, se = stats.mean_stderr(fr) if len(fr) > 1 else (float(fr.mean()), 0.0)
    counters = {"runs_with_uncovered_points": int(np.sum(fr > 0)), "runs": int(len(fr))}
    return ExperimentReport(cfg.experiment, {}, est, se, None, None, counters,
                            details={"per_point_bound": math.exp(-s / rho_min ** (cfg.d - 1))})


# ------------------------------------------------------------ delays


def _limit_cdf(d):
    c = hg.dim_constants(d).c_d
    return lambda t: 1.0 - np.exp(-c / (d - 1) * np.exp((d - 1) * np.asarray(t)))


def _delay_chunk(d, params, sid, n):
    rng = stream(params["seed"], sid)
    lam = float(params.get("lambda", 1e-3))
    c = hg.dim_constants(d).c_d
    # the limit process puts mass 60 below t_max
    t_max = math.log(60 * (d - 1) / c) / (d - 1)
    r_max = math.log(1 / lam) + t_max
    first, gaps, empty = [], [], 0
    for _ in range(n):
        smp = co.sample_finite_ppp(d, lam, r_max, rng)
        if len(smp.distances) == 0:
            empty += 1
            continue
        D = co.empirical_delays(smp)
        first.append(D[0])
        Y = c / (d - 1) * np.exp((d - 1) * D[:11])
        gaps.extend(np.diff(Y).tolist())
    return first, gaps, empty


def _delays(cfg, workers):
    d = cfg.d
    reps = int(_get(cfg, "reps", 10_000))
    parts = _run_chunks(_delay_chunk, cfg, reps, 1_000, workers)
    D1 = np.array([x for p in parts for x in p[0]])
    gaps = np.array([x for p in parts for x in p[1]])
    ks = stats.ks_test(D1, _limit_cdf(d))
    est, se = stats.mean_stderr(D1)
    c = hg.dim_constants(d).c_d
    limit_mean = (math.log((d - 1) / c) - np.euler_gamma) / (d - 1)
    g, g_se = stats.mean_stderr(gaps)
    return ExperimentReport(cfg.experiment, {}, est, se, float(limit_mean),
                            {"stat": ks.statistic, "p": ks.p_value},
                            {"empty_samples": sum(p[2] for p in parts)},
                            details={"mean_gap_first_10": {"estimate": g, "stderr": g_se, "analytic": 1.0}})


# ------------------------------------------------------------ tree


def _tree_chunk(d, params, sid, n):
    rng = stream(params["seed"], sid)
    cfg = tr.TreeConfig(int(params.get("k", 3)), float(params.get("xi", 1.0)), 1)
    k = cfg.k
    counts = np.zeros(k + 1, dtype=np.int64)
    for _ in range(n):
        counts[tr.root_degree_sample(cfg, rng)] += 1
    return counts


def _tree_degree(cfg, workers):
    k = int(_get(cfg, "k", 3))
    reps = int(_get(cfg, "reps", 100_000))
    counts = sum(_run_chunks(_tree_chunk, cfg, reps, 10_000, workers))[1:]
    pmf = np.array([an.tree_root_degree_pmf(k, j) for j in range(1, k + 1)])
    chi = stats.chi_square(counts, pmf * reps)
    degrees = np.repeat(np.arange(1, k + 1), counts)
    est, se = stats.mean_stderr(degrees)
    details = {
        "counts": counts.tolist(),
        "pmf_estimate": (counts / reps).tolist(),
        "pmf": pmf.tolist(),
        "chi2": {"stat": chi.statistic, "p": chi.p_value},
    }
    return ExperimentReport(cfg.experiment, {}, est, se, float(np.arange(1, k + 1) @ pmf), None, {},
                            details=details)


# ------------------------------------------------------------ constants


def _isoperimetric(cfg, workers):
    d = cfg.d
    fd = an.hole_law_slope_at_zero(d)
    return ExperimentReport(cfg.experiment, {}, fd, 0.0, an.isoperimetric_constant(d), None, {},
                            details={"asymptote": an.isoperimetric_asymptote(d)})


def _nu_chunk(d, params, sid, n):
    est, se = an.nu_d_mc(d, n, stream(params["seed"], sid))
    return est, se, n


def _nu_d(cfg, workers):
    n = int(_get(cfg, "reps", 10**7))
    parts = _run_chunks(_nu_chunk, cfg, n, 10**6, workers)
    w = np.array([p[2] for p in parts], dtype=float)
    est = float(np.sum(w * [p[0] for p in parts]) / w.sum())
    se = float(math.sqrt(np.sum((w * [p[1] for p in parts]) ** 2)) / w.sum())
    analytic = {2: an.NU2, 3: an.NU3}.get(cfg.d)
    return ExperimentReport(cfg.experiment, {}, est, se, analytic, None, {})


EXPERIMENTS = {
    "hole-prob": _hole,
    "height-angle": _height_angle,
    "vertex-intensity": _vertex_intensity,
    "edge-length": _edge_length,
    "length-area": _length_area,
    "delays": _delays,
    "tree-degree": _tree_degree,
    "covering": _covering,
    "isoperimetric": _isoperimetric,
    "nu-d": _nu_d,
}


def run(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    t0 = time.perf_counter()
    rep = EXPERIMENTS[config.experiment](config, workers)
    rep.params = {"d": config.d, **dict(sorted(config.params.items()))}
    rep.runtime_seconds = time.perf_counter() - t0
    return rep
