"""Static SVG phase portraits for planar systems.

One polyline per trajectory plus optional level-set curves of a scalar
function, extracted by marching squares on a regular grid.  Output is
a plain SVG string; no plotting dependency.
"""

import numpy as np


def _grid_values(F, xs, ys):
    vals = np.empty((len(xs), len(ys)))
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            vals[i, j] = F(np.array([xv, yv]))
    return vals


def _marching_squares(vals, xs, ys, level):
    """Line segments approximating {F = level} from precomputed grid values."""
    nx, ny = len(xs), len(ys)
    segs = []

    def interp(p1, v1, p2, v2):
        t = 0.5 if v2 == v1 else (level - v1) / (v2 - v1)
        t = min(1.0, max(0.0, t))
        return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))

    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = [
                ((xs[i], ys[j]), vals[i, j]),
                ((xs[i + 1], ys[j]), vals[i + 1, j]),
                ((xs[i + 1], ys[j + 1]), vals[i + 1, j + 1]),
                ((xs[i], ys[j + 1]), vals[i, j + 1]),
            ]
            above = [v >= level for _, v in corners]
            if all(above) or not any(above):
                continue
            pts = []
            for k in range(4):
                (p1, v1), (p2, v2) = corners[k], corners[(k + 1) % 4]
                if (v1 >= level) != (v2 >= level):
                    pts.append(interp(p1, v1, p2, v2))
            if len(pts) >= 2:
                segs.append((pts[0], pts[1]))
            if len(pts) == 4:  # saddle cell: join remaining pair
                segs.append((pts[2], pts[3]))
    return segs


def phase_portrait_svg(
    trajectories,
    value_fn=None,
    levels=(),
    grid=400,
    size=640,
    margin_frac=0.08,
    header_comment=None,
):
    """Render 2-D trajectories (lists of state vectors) and level sets."""
    pts = np.vstack([np.array([s for s in traj]) for traj in trajectories])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo = lo - margin_frac * span
    hi = hi + margin_frac * span
    span = hi - lo

    def to_px(p):
        u = (p[0] - lo[0]) / span[0] * size
        v = size - (p[1] - lo[1]) / span[1] * size
        return u, v

    parts = ['<?xml version="1.0" encoding="UTF-8"?>']
    if header_comment:
        parts.append(f"<!-- {header_comment} -->")
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" '
        f'width="{size}" height="{size}">'
    )
    parts.append(f'<rect width="{size}" height="{size}" fill="white"/>')

    if value_fn is not None and levels:
        n = int(grid)
        xs = np.linspace(lo[0], hi[0], n)
        ys = np.linspace(lo[1], hi[1], n)
        vals = _grid_values(value_fn, xs, ys)
        for level in levels:
            for (p1, p2) in _marching_squares(vals, xs, ys, level):
                a, b = to_px(p1), to_px(p2)
                parts.append(
                    f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" '
                    f'x2="{b[0]:.2f}" y2="{b[1]:.2f}" '
                    'stroke="#cc3333" stroke-width="1" stroke-dasharray="4 3"/>'
                )

    colors = ("#1f4e99", "#2e8540", "#7d3c98", "#b9770e")
    for k, traj in enumerate(trajectories):
        coords = " ".join(f"{u:.2f},{v:.2f}" for u, v in (to_px(p) for p in traj))
        parts.append(
            f'<polyline points="{coords}" fill="none" '
            f'stroke="{colors[k % len(colors)]}" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
