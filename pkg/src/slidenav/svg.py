"""Self-contained SVG rendering of a recorded run.

One figure: the robot path split into mode-colored segments (pursuit vs
boundary following), obstacle boundary snapshots over the run, the
d0-equidistant curve they slide along, and start/target/capture markers.
Pure string assembly, no plotting dependency; output is deterministic for
a given trace.
"""

import math

import numpy as np

from .obstacle import ObstacleModel
from .trace import Trace

PURSUIT_COLOR = "#2b6cb0"
AVOID_COLOR = "#d9480f"
BOUNDARY_COLOR = "#495057"
BOUNDARY_FILL = "#dee2e6"
OFFSET_COLOR = "#2f9e44"
MAX_SEGMENT_POINTS = 1500
N_SNAPSHOTS = 5


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    """World -> pixel transform with a padded viewport, y axis flipped."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray, width: int):
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = float(ys.min()), float(ys.max())
        pad = 0.06 * max(x_hi - x_lo, y_hi - y_lo, 1e-9)
        x_lo, x_hi = x_lo - pad, x_hi + pad
        y_lo, y_hi = y_lo - pad, y_hi + pad
        self.scale = width / (x_hi - x_lo)
        self.width = width
        self.height = int(math.ceil((y_hi - y_lo) * self.scale))
        self.x_lo, self.y_hi = x_lo, y_hi

    def pix(self, x, y):
        return (np.asarray(x) - self.x_lo) * self.scale, \
               (self.y_hi - np.asarray(y)) * self.scale

    def points(self, x, y) -> str:
        px, py = self.pix(x, y)
        return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(np.atleast_1d(px),
                                                               np.atleast_1d(py)))


def _mode_segments(mode: np.ndarray):
    """Yield (start, stop) inclusive row runs of constant mode."""
    n = mode.size
    i = 0
    while i < n:
        j = i
        while j + 1 < n and mode[j + 1] == mode[i]:
            j += 1
        yield i, j
        i = j + 1


def _decimate(lo: int, hi: int) -> np.ndarray:
    idx = np.arange(lo, hi + 1)
    stride = max(1, idx.size // MAX_SEGMENT_POINTS)
    keep = idx[::stride]
    if keep[-1] != hi:
        keep = np.append(keep, hi)
    return keep


def render(trace: Trace, obstacle: ObstacleModel, width: int = 720) -> str:
    """SVG document for one run: path, boundary snapshots, equidistant curve."""
    x = trace.column("x")
    y = trace.column("y")
    mode = trace.column("mode")
    t = trace.column("t")
    d0 = trace.fnum("d0")
    t_final = float(t[-1])
    target = (trace.fnum("target_x"), trace.fnum("target_y"))

    times = [0.0] if obstacle.is_static() else \
        [t_final * k / (N_SNAPSHOTS - 1) for k in range(N_SNAPSHOTS)]
    boundaries = [obstacle.offset_polyline(0.0, tk) for tk in times]
    offsets = [obstacle.offset_polyline(d0, tk) for tk in times]

    all_x = np.concatenate([x, [target[0]]] + [b[:, 0] for b in boundaries]
                           + [o[:, 0] for o in offsets])
    all_y = np.concatenate([y, [target[1]]] + [b[:, 1] for b in boundaries]
                           + [o[:, 1] for o in offsets])
    fr = _Frame(all_x, all_y, width)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.width}" '
        f'height="{fr.height}" viewBox="0 0 {fr.width} {fr.height}">',
        f'<rect width="{fr.width}" height="{fr.height}" fill="white"/>',
    ]

    # obstacle snapshots, oldest faintest; only the first is filled
    for k, b in enumerate(boundaries):
        opacity = 0.25 + 0.75 * (k + 1) / len(boundaries)
        fill = BOUNDARY_FILL if k == 0 else "none"
        pts = fr.points(np.append(b[:, 0], b[0, 0]), np.append(b[:, 1], b[0, 1]))
        parts.append(f'<polyline points="{pts}" fill="{fill}" '
                     f'stroke="{BOUNDARY_COLOR}" stroke-width="1.5" '
                     f'stroke-opacity="{opacity:.2f}"/>')
    for k, o in enumerate(offsets):
        opacity = 0.25 + 0.75 * (k + 1) / len(offsets)
        pts = fr.points(np.append(o[:, 0], o[0, 0]), np.append(o[:, 1], o[0, 1]))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{OFFSET_COLOR}" stroke-width="1.2" '
                     f'stroke-dasharray="6 4" stroke-opacity="{opacity:.2f}"/>')

    for lo, hi in _mode_segments(mode):
        stop = min(hi + 1, mode.size - 1)  # join segments end to end
        keep = _decimate(lo, stop)
        color = AVOID_COLOR if mode[lo] == 1.0 else PURSUIT_COLOR
        parts.append(f'<polyline points="{fr.points(x[keep], y[keep])}" '
                     f'fill="none" stroke="{color}" stroke-width="2"/>')

    sx, sy = fr.pix(x[0], y[0])
    parts.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="4" fill="black"/>')
    tx, ty = fr.pix(*target)
    parts.append(f'<circle cx="{_fmt(tx)}" cy="{_fmt(ty)}" r="5" fill="none" '
                 f'stroke="black" stroke-width="1.5"/>')
    parts.append(f'<path d="M {_fmt(tx - 7)} {_fmt(ty)} H {_fmt(tx + 7)} '
                 f'M {_fmt(tx)} {_fmt(ty - 7)} V {_fmt(ty + 7)}" '
                 f'stroke="black" stroke-width="1.5"/>')

    name = obstacle.name or "obstacle"
    outcome = trace.meta.get("outcome", "")
    parts.append(f'<text x="10" y="18" font-family="sans-serif" font-size="13">'
                 f'{name}: {outcome}, t = {t_final:.2f} s</text>')
    legend = [(PURSUIT_COLOR, "pursuit"), (AVOID_COLOR, "boundary following"),
              (OFFSET_COLOR, f"d0 = {d0:g} m offset")]
    for k, (color, label) in enumerate(legend):
        y0 = 36 + 16 * k
        parts.append(f'<line x1="10" y1="{y0}" x2="34" y2="{y0}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="40" y="{y0 + 4}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts)


def write_svg(path, trace: Trace, obstacle: ObstacleModel,
              width: int = 720) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render(trace, obstacle, width))
