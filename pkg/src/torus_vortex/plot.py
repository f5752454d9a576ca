"""Static SVG figures of vortex trajectories.

One row per trajectory: the left panel shows the vortex paths on the unit
square (paths are cut where they cross the periodic seam), the right
panel shows x_1(t) and y_1(t).  Degree +1 vortices are marked with "+",
degree -1 with "x", at their initial positions.
"""

import numpy as np

PANEL = 240.0
MARGIN = 36.0
GAP = 60.0
COLORS = ("#1f4e9c", "#b2182b", "#2c7f3f", "#7b3294")


def split_at_seam(points, jump=0.5):
    """Split a sequence of wrapped points wherever a coordinate jumps by more than ``jump``."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return []
    if pts.ndim == 1:
        pts = pts[:, None]
    cuts = np.nonzero(np.any(np.abs(np.diff(pts, axis=0)) > jump, axis=1))[0] + 1
    return [seg for seg in np.split(pts, cuts) if len(seg) > 0]


def _moving(seg):
    return len(seg) > 1 and np.any(np.ptp(seg, axis=0) > 0)


def _num(x):
    return f"{x:.2f}"


def _polyline(pts, color, width=1.0):
    body = " ".join(f"{_num(x)},{_num(y)}" for x, y in pts)
    return (f'<polyline points="{body}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>')


def _glyph(x, y, degree, size=5.0):
    if degree > 0:
        d = f"M{_num(x - size)},{_num(y)}H{_num(x + size)}M{_num(x)},{_num(y - size)}V{_num(y + size)}"
    else:
        s = size * 0.8
        d = (f"M{_num(x - s)},{_num(y - s)}L{_num(x + s)},{_num(y + s)}"
             f"M{_num(x - s)},{_num(y + s)}L{_num(x + s)},{_num(y - s)}")
    return f'<path d="{d}" stroke="black" stroke-width="1.6" fill="none"/>'


def _frame(x0, y0, w, h, xlabel, ylabel, xmax):
    out = [f'<rect x="{_num(x0)}" y="{_num(y0)}" width="{_num(w)}" height="{_num(h)}" '
           f'fill="none" stroke="black" stroke-width="0.8"/>']
    for frac in (0.0, 0.5, 1.0):
        tx = x0 + frac * w
        ty = y0 + h - frac * h
        out.append(f'<text x="{_num(tx)}" y="{_num(y0 + h + 12)}" font-size="9" '
                   f'text-anchor="middle">{frac * xmax:g}</text>')
        out.append(f'<text x="{_num(x0 - 4)}" y="{_num(ty + 3)}" font-size="9" '
                   f'text-anchor="end">{frac:g}</text>')
    out.append(f'<text x="{_num(x0 + w / 2)}" y="{_num(y0 + h + 24)}" font-size="10" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="{_num(x0 - 22)}" y="{_num(y0 + h / 2)}" font-size="10" '
               f'text-anchor="middle" transform="rotate(-90 {_num(x0 - 22)} {_num(y0 + h / 2)})">'
               f'{ylabel}</text>')
    return out


def trajectory_svg(trajectories, labels=None):
    """SVG document (string) for a list of trajectories, one row each."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    labels = labels or [f"mu = {tr.params.mu:g}" for tr in trajectories]
    width = 2 * PANEL + GAP + 2 * MARGIN
    row_h = PANEL + 2 * MARGIN
    height = row_h * len(trajectories)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" '
           f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">',
           f'<rect width="{_num(width)}" height="{_num(height)}" fill="white"/>']
    for r, (tr, label) in enumerate(zip(trajectories, labels)):
        top = r * row_h + MARGIN
        left = MARGIN
        right = MARGIN + PANEL + GAP
        out.append(f'<text x="{_num(left)}" y="{_num(top - 10)}" font-size="11">{label}</text>')
        out += _frame(left, top, PANEL, PANEL, "x", "y", 1.0)
        pos = tr.positions()

        def to_px(p):
            return np.column_stack([left + p[:, 0] * PANEL, top + PANEL - p[:, 1] * PANEL])

        out.append('<g class="paths">')
        for j in range(len(tr.degrees)):
            color = COLORS[j % len(COLORS)]
            for seg in split_at_seam(pos[:, j, :]):
                if _moving(seg):
                    out.append(_polyline(to_px(seg), color))
        if len(pos):
            for j, d in enumerate(tr.degrees):
                x, y = to_px(pos[:1, j, :])[0]
                out.append(_glyph(x, y, d))
        out.append("</g>")
        times = tr.times
        t_max = float(times[-1]) if len(times) and times[-1] > 0 else 1.0
        out += _frame(right, top, PANEL, PANEL, "t", "x1, y1", t_max)
        out.append('<g class="series">')
        for c, color in ((0, COLORS[0]), (1, COLORS[1])):
            if not len(pos):
                continue
            series = np.column_stack([times, pos[:, 0, c]])
            for seg in split_at_seam(series):
                if _moving(seg):
                    px = np.column_stack([right + seg[:, 0] / t_max * PANEL,
                                          top + PANEL - seg[:, 1] * PANEL])
                    out.append(_polyline(px, color))
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(trajectories, path, labels=None):
    with open(path, "w") as fh:
        fh.write(trajectory_svg(trajectories, labels))
