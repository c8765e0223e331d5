"""Deterministic SVG renderings of the disk tessellation and of the typical cell."""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import corona as co
from . import origincell as oc


def _f(x: float) -> str:
    return f"{x:.5f}".rstrip("0").rstrip(".") if x != 0 else "0"


def _color(i: int) -> str:
    h = (i * 137.508) % 360.0
    return f"hsl({h:.1f},55%,{55 + 10 * (i % 3)}%)"


def _write(svg: str, out_path) -> str:
    if out_path is not None:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(svg)
    return svg


def disk_labels(proc: co.NucleusProcess, resolution: int, batch: int = 20_000):
    """Cell index (1-based) at each pixel centre of the square ``[-1,1]^2``;
    0 outside the disk.  Returns ``(labels, truncation_unsafe_count)``."""
    if proc.d != 2:
        raise ValueError("disk rendering needs d = 2")
    step = 2.0 / resolution
    axis = -1.0 + step * (np.arange(resolution) + 0.5)
    X, Y = np.meshgrid(axis, -axis)  # row 0 at the top
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inside = np.einsum("ij,ij->i", pts, pts) < 1.0
    lab = np.zeros(len(pts), dtype=np.int64)
    unsafe = 0
    idx = np.nonzero(inside)[0]
    for k in range(0, len(idx), batch):
        sl = idx[k:k + batch]
        _, arg, bad = co.separation_field_many(pts[sl], proc)
        lab[sl] = arg
        unsafe += int(bad.sum())
    return lab.reshape(resolution, resolution), unsafe


def adjacency(labels: np.ndarray) -> set:
    """Pairs of distinct cells meeting in the 4-neighbourhood of a pixel."""
    pairs = set()
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        m = (a != b) & (a > 0) & (b > 0)
        for i, j in zip(a[m].tolist(), b[m].tolist()):
            pairs.add((min(i, j), max(i, j)))
    return pairs


def render_disk(proc: co.NucleusProcess, resolution: int = 400, out_path=None,
                corona: bool = True, delaunay: bool = False) -> str:
    """Pixel rendering of the cells in the Poincare disk.

    Corona points are drawn outside the disk at their angle, with the radius
    scaled linearly into the band ``[1.04, 1.24]``.
    """
    labels, unsafe = disk_labels(proc, resolution)
    step = 2.0 / resolution
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.3 -1.3 2.6 2.6" '
        f'width="{resolution}" height="{resolution}" shape-rendering="crispEdges">',
        f"<!-- nuclei={len(proc)} resolution={resolution} truncation_unsafe={unsafe} -->",
    ]
    for row in range(resolution):
        line = labels[row]
        y = -1.0 + row * step
        start = 0
        for col in range(1, resolution + 1):
            if col == resolution or line[col] != line[start]:
                if line[start] > 0:
                    out.append(
                        f'<rect x="{_f(-1.0 + start * step)}" y="{_f(y)}" width="{_f((col - start) * step)}" '
                        f'height="{_f(step)}" fill="{_color(int(line[start]))}"/>'
                    )
                start = col
    out.append('<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.004"/>')
    rmax = float(proc.radii.max()) if len(proc) else 1.0

    def mark(i):
        th = proc.thetas[i - 1]
        rr = 1.04 + 0.2 * proc.radii[i - 1] / rmax
        return th[0] * rr, -th[1] * rr

    if delaunay:
        for i, j in sorted(adjacency(labels)):
            (x1, y1), (x2, y2) = mark(i), mark(j)
            out.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                       'stroke="black" stroke-width="0.003" stroke-opacity="0.5"/>')
    if corona:
        for i in range(1, len(proc) + 1):
            x, y = mark(i)
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="0.012" fill="{_color(i)}" stroke="black" '
                       'stroke-width="0.002"/>')
    out.append("</svg>")
    return _write("\n".join(out) + "\n", out_path)


def render_halfplane(sample: oc.DepositionSample, out_path=None, interval=None, resolution: int = 200) -> str:
    """Half-spheres and the cell above their envelope (d=2), or a heightmap of
    the boundary height over the window (d=3)."""
    if sample.d == 3:
        return _render_heightmap(sample, out_path, resolution)
    if sample.d != 2:
        raise ValueError("half-plane rendering supports d = 2 and 3")
    a, b = (-sample.window_A, sample.window_A) if interval is None else map(float, interval)
    c, rho = sample.centers[:, 0], sample.rhos
    env = None
    if len(sample) == 0:
        warnings.warn("empty sample: no envelope to draw", stacklevel=2)
    else:
        try:
            env = oc.envelope_2d(sample, (a, b))
        except oc.Uncovered as e:
            warnings.warn(f"envelope not drawn: {e}", stacklevel=2)
    top = 1.5 * (max(float(np.max(rho[(c + rho > a) & (c - rho < b)], initial=0.0)), 1e-3))
    top = min(top, (b - a))
    w = b - a
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_f(a)} {_f(-top)} {_f(w)} {_f(top)}" '
        f'width="800" height="{max(int(800 * top / w), 50)}">',
        f'<line x1="{_f(a)}" y1="0" x2="{_f(b)}" y2="0" stroke="black" stroke-width="{_f(w / 800)}"/>',
    ]
    sw = _f(w / 1600)
    if env is not None:
        path = [f"M {_f(env.piece_left[0])} {_f(-top)}"]
        for i, xl, xr in env.pieces:
            zl = math.sqrt(max(rho[i] ** 2 - (xl - c[i]) ** 2, 0.0))
            zr = math.sqrt(max(rho[i] ** 2 - (xr - c[i]) ** 2, 0.0))
            if len(path) == 1:
                path.append(f"L {_f(xl)} {_f(-zl)}")
            path.append(f"A {_f(rho[i])} {_f(rho[i])} 0 0 1 {_f(xr)} {_f(-zr)}")
        path.append(f"L {_f(env.piece_right[-1])} {_f(-top)} Z")
        out.append(f'<path d="{" ".join(path)}" fill="#dde8f5" stroke="none"/>')
    for j in np.nonzero((c + rho > a) & (c - rho < b))[0]:
        out.append(f'<path d="M {_f(c[j] - rho[j])} 0 A {_f(rho[j])} {_f(rho[j])} 0 0 1 {_f(c[j] + rho[j])} 0" '
                   f'fill="none" stroke="#888" stroke-width="{sw}"/>')
    if env is not None:
        path = []
        for i, xl, xr in env.pieces:
            zl = math.sqrt(max(rho[i] ** 2 - (xl - c[i]) ** 2, 0.0))
            zr = math.sqrt(max(rho[i] ** 2 - (xr - c[i]) ** 2, 0.0))
            path.append(f"M {_f(xl)} {_f(-zl)} A {_f(rho[i])} {_f(rho[i])} 0 0 1 {_f(xr)} {_f(-zr)}")
        out.append(f'<path d="{" ".join(path)}" fill="none" stroke="#c00" stroke-width="{_f(3 * w / 1600)}"/>')
        for x, z in env.vertices:
            out.append(f'<circle class="vertex" cx="{_f(x)}" cy="{_f(-z)}" r="{_f(w / 300)}" fill="black"/>')
    out.append("</svg>")
    return _write("\n".join(out) + "\n", out_path)


def _render_heightmap(sample: oc.DepositionSample, out_path, resolution: int) -> str:
    A = sample.window_A
    step = 2 * A / resolution
    axis = -A + step * (np.arange(resolution) + 0.5)
    X, Y = np.meshgrid(axis, -axis)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    h2 = np.full(len(pts), -np.inf)
    for k in range(0, len(sample), 64):
        cc = sample.centers[k:k + 64]
        rr = sample.rhos[k:k + 64]
        d2 = ((pts[:, None, :] - cc[None, :, :]) ** 2).sum(axis=2)
        h2 = np.maximum(h2, ((rr**2)[None, :] - d2).max(axis=1))
    H = np.sqrt(np.maximum(h2, 0.0)).reshape(resolution, resolution)
    hi = float(H.max()) if H.size and H.max() > 0 else 1.0
    level = np.minimum((H / hi * 15).astype(int), 15)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_f(-A)} {_f(-A)} {_f(2 * A)} {_f(2 * A)}" '
           f'width="{resolution}" height="{resolution}" shape-rendering="crispEdges">']
    for row in range(resolution):
        line = level[row]
        start = 0
        for col in range(1, resolution + 1):
            if col == resolution or line[col] != line[start]:
                g = 40 + 13 * int(line[start])
                out.append(f'<rect x="{_f(-A + start * step)}" y="{_f(-A + row * step)}" '
                           f'width="{_f((col - start) * step)}" height="{_f(step)}" fill="rgb({g},{g},{g})"/>')
                start = col
    out.append("</svg>")
    return _write("\n".join(out) + "\n", out_path)
