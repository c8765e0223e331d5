"""CSV and JSON export with fixed formatting (17 significant digits, LF endings)."""

from __future__ import annotations

import csv
import json

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_nuclei_csv(proc, path) -> None:
    """Columns ``theta_1..theta_d, R, D``."""
    header = [f"theta_{i + 1}" for i in range(proc.d)] + ["R", "D"]
    write_csv(path, header, ((*th, R, D) for th, R, D in zip(proc.thetas, proc.radii, proc.delays)))


def write_spheres_csv(sample, path) -> None:
    header = [f"center_{i + 1}" for i in range(sample.d - 1)] + ["rho"]
    write_csv(path, header, ((*c, r) for c, r in zip(sample.centers, sample.rhos)))


def write_envelope_points_csv(points, path) -> None:
    """Rows ``x..., H, Theta, sphere_index`` from a list of envelope points."""
    points = list(points)
    n = len(points[0].base) if points else 1
    header = [f"x_{i + 1}" for i in range(n)] + ["H", "Theta", "sphere_index"]
    write_csv(path, header, ((*p.base, p.H, p.Theta, p.sphere_index) for p in points))


def write_vertices_csv(vertices, pairs, path) -> None:
    vertices = np.asarray(vertices)
    pairs = np.asarray(pairs)
    pos_names = ["x", "z"] if vertices.shape[1] == 2 else ["x", "y", "z"]
    idx_names = [f"sphere_{i + 1}" for i in range(pairs.shape[1])]
    write_csv(path, pos_names + idx_names, ((*v, *p) for v, p in zip(vertices, pairs)))


def write_root_degrees_csv(degrees, path) -> None:
    write_csv(path, ["replication", "root_degree"], enumerate(degrees))


def write_json(obj, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not JSON serialisable: {type(x)}")
