"""Time-varying deforming obstacle: reference boundary curve + a chain of
motion primitives, with analytic first/second derivatives in time and the
boundary fields (frame, curvature, velocity, acceleration, normal-velocity
gradient) the controller checks consume.

Primitives are applied in listed order. Every scalar primitive parameter is a
TimeProfile offset + slope*t + amp*sin(omega*t + phase), which covers the
constant / linear / sinusoid cases. Models are immutable after construction;
all evaluation is read-only and parameterized by the reference curve parameter
s in [0,1), never by inverting the deformation.
"""

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels


class DegenerateTangentError(ValueError):
    """Deformed boundary tangent shorter than 1e-10: frame undefined."""


class ProjectionError(ValueError):
    """Query point farther from the boundary than the projection tolerance."""


class TimeProfile(NamedTuple):
    """offset + slope*t + amp*sin(omega*t + phase)"""

    offset: float = 0.0
    slope: float = 0.0
    amp: float = 0.0
    omega: float = 0.0
    phase: float = 0.0

    @classmethod
    def constant(cls, value: float) -> "TimeProfile":
        return cls(offset=float(value))

    def value(self, t: float) -> float:
        return self.offset + self.slope * t + self.amp * math.sin(self.omega * t + self.phase)

    def rate(self, t: float) -> float:
        return self.slope + self.amp * self.omega * math.cos(self.omega * t + self.phase)

    def accel(self, t: float) -> float:
        return -self.amp * self.omega ** 2 * math.sin(self.omega * t + self.phase)

    def negated(self) -> "TimeProfile":
        return TimeProfile(-self.offset, -self.slope, -self.amp, self.omega, self.phase)

    def as_row(self) -> list[float]:
        return [self.offset, self.slope, self.amp, self.omega, self.phase]


def _as_profile(p) -> TimeProfile:
    if isinstance(p, TimeProfile):
        return p
    return TimeProfile.constant(p)


# ---------------------------------------------------------------------------
# motion primitives


class Translate(NamedTuple):
    x: TimeProfile
    y: TimeProfile

    kind = kernels.PRIM_TRANSLATE

    def params_row(self) -> np.ndarray:
        row = np.zeros(kernels.PRIM_ROW)
        row[0:5] = self.x.as_row()
        row[5:10] = self.y.as_row()
        return row

    def validate_times(self, ts) -> None:
        pass

    def mirror_y(self) -> "Translate":
        return Translate(self.x, self.y.negated())


class Rotate(NamedTuple):
    """Rotation by angle(t) about a (possibly moving) center."""

    angle: TimeProfile
    center_x: TimeProfile = TimeProfile()
    center_y: TimeProfile = TimeProfile()

    kind = kernels.PRIM_ROTATE

    def params_row(self) -> np.ndarray:
        row = np.zeros(kernels.PRIM_ROW)
        row[0:5] = self.angle.as_row()
        row[5:10] = self.center_x.as_row()
        row[10:15] = self.center_y.as_row()
        return row

    def validate_times(self, ts) -> None:
        pass

    def mirror_y(self) -> "Rotate":
        return Rotate(self.angle.negated(), self.center_x, self.center_y.negated())


class Scale(NamedTuple):
    """Anisotropic scaling about a fixed center; factors must stay positive."""

    factor_x: TimeProfile
    factor_y: TimeProfile
    center_x: TimeProfile = TimeProfile()
    center_y: TimeProfile = TimeProfile()

    kind = kernels.PRIM_SCALE

    def params_row(self) -> np.ndarray:
        row = np.zeros(kernels.PRIM_ROW)
        row[0:5] = self.factor_x.as_row()
        row[5:10] = self.factor_y.as_row()
        row[10:15] = self.center_x.as_row()
        row[15:20] = self.center_y.as_row()
        return row

    def validate_times(self, ts) -> None:
        for t in ts:
            fx = self.factor_x.value(t)
            fy = self.factor_y.value(t)
            if fx <= 1e-6 or fy <= 1e-6:
                raise ValueError(f"scale factors must stay positive; got ({fx}, {fy}) at t={t}")

    def mirror_y(self) -> "Scale":
        return Scale(self.factor_x, self.factor_y, self.center_x, self.center_y.negated())


class Shear(NamedTuple):
    """Planar shear [[1, kx], [ky, 1]] about a fixed center; needs kx*ky < 1."""

    coupling_x: TimeProfile
    coupling_y: TimeProfile
    center_x: TimeProfile = TimeProfile()
    center_y: TimeProfile = TimeProfile()

    kind = kernels.PRIM_SHEAR

    def params_row(self) -> np.ndarray:
        row = np.zeros(kernels.PRIM_ROW)
        row[0:5] = self.coupling_x.as_row()
        row[5:10] = self.coupling_y.as_row()
        row[10:15] = self.center_x.as_row()
        row[15:20] = self.center_y.as_row()
        return row

    def validate_times(self, ts) -> None:
        for t in ts:
            det = 1.0 - self.coupling_x.value(t) * self.coupling_y.value(t)
            if det <= 1e-6:
                raise ValueError(f"shear determinant 1-kx*ky = {det} <= 0 at t={t}")

    def mirror_y(self) -> "Shear":
        return Shear(self.coupling_x.negated(), self.coupling_y.negated(),
                     self.center_x, self.center_y.negated())


class Warp(NamedTuple):
    """Sinusoidal bending: axis 0 maps (x,y) -> (x, y + amp(t)*sin(w*x+phase)),
    axis 1 the transpose. Globally injective with unit Jacobian determinant
    for any amplitude.
    """

    amplitude: TimeProfile
    axis: int = 0
    frequency: float = 1.0
    phase: float = 0.0

    kind = kernels.PRIM_WARP

    def params_row(self) -> np.ndarray:
        row = np.zeros(kernels.PRIM_ROW)
        row[0:5] = self.amplitude.as_row()
        row[5] = float(self.axis)
        row[6] = self.frequency
        row[7] = self.phase
        return row

    def validate_times(self, ts) -> None:
        if self.axis not in (0, 1):
            raise ValueError(f"warp axis must be 0 or 1, got {self.axis}")

    def mirror_y(self) -> "Warp":
        if self.axis == 0:
            return Warp(self.amplitude.negated(), 0, self.frequency, self.phase)
        return Warp(self.amplitude.negated(), 1, self.frequency, -self.phase)


Primitive = Translate | Rotate | Scale | Shear | Warp


# ---------------------------------------------------------------------------
# reference curves (all CCW: domain left of the tangent, normal inward)


def _shoelace(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class Circle(NamedTuple):
    center_x: float
    center_y: float
    radius: float

    def pack_parts(self):
        if self.radius <= 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")
        return (kernels.CURVE_CIRCLE,
                np.array([self.center_x, self.center_y, self.radius]),
                np.zeros(0), np.zeros((4, 0)), np.zeros((4, 0)))

    def mirror_y(self) -> "Circle":
        return Circle(self.center_x, -self.center_y, self.radius)


class Ellipse(NamedTuple):
    center_x: float
    center_y: float
    semi_x: float
    semi_y: float

    def pack_parts(self):
        if self.semi_x <= 0 or self.semi_y <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        return (kernels.CURVE_ELLIPSE,
                np.array([self.center_x, self.center_y, self.semi_x, self.semi_y]),
                np.zeros(0), np.zeros((4, 0)), np.zeros((4, 0)))

    def mirror_y(self) -> "Ellipse":
        return Ellipse(self.center_x, -self.center_y, self.semi_x, self.semi_y)


class PeriodicSpline:
    """Closed C2 cubic spline through control points, uniform parameter."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise ValueError("spline needs at least 4 control points of shape (n,2)")
        if _shoelace(pts) <= 0:
            raise ValueError("spline control points must wind counterclockwise")
        self.points = pts
        n = pts.shape[0]
        ts = np.linspace(0.0, 1.0, n + 1)
        closed = np.vstack([pts, pts[:1]])
        cs = CubicSpline(ts, closed, bc_type="periodic", axis=0)
        self._ts = cs.x
        self._cx = np.ascontiguousarray(cs.c[:, :, 0])
        self._cy = np.ascontiguousarray(cs.c[:, :, 1])

    def pack_parts(self):
        return (kernels.CURVE_SPLINE, np.zeros(0), self._ts, self._cx, self._cy)

    def mirror_y(self) -> "PeriodicSpline":
        flipped = self.points[::-1].copy()
        flipped[:, 1] = -flipped[:, 1]
        return PeriodicSpline(flipped)

    def __eq__(self, other):
        return isinstance(other, PeriodicSpline) and np.array_equal(self.points, other.points)


class RoundedPolygon:
    """Strictly convex polygon with circular corner fillets, traversed CCW at
    constant parametric speed. The parameter seam sits mid-edge so the curve
    is smooth across s=0.
    """

    def __init__(self, vertices, corner_radius: float):
        verts = np.asarray(vertices, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("rounded polygon needs at least 3 vertices of shape (n,2)")
        if corner_radius <= 0:
            raise ValueError("corner radius must be positive")
        if _shoelace(verts) <= 0:
            raise ValueError("vertices must wind counterclockwise")
        self.vertices = verts
        self.corner_radius = float(corner_radius)
        n = verts.shape[0]
        edges = np.roll(verts, -1, axis=0) - verts
        elen = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(elen < 1e-12):
            raise ValueError("degenerate polygon edge")
        units = edges / elen[:, None]
        # turn angle at vertex i is between edge i-1 and edge i
        turns = np.empty(n)
        for i in range(n):
            uin = units[i - 1]
            uout = units[i]
            cross = uin[0] * uout[1] - uin[1] * uout[0]
            dot = uin[0] * uout[0] + uin[1] * uout[1]
            turns[i] = math.atan2(cross, dot)
        if np.any(turns <= 1e-9):
            raise ValueError("polygon must be strictly convex (CCW turns at every vertex)")
        trim = corner_radius * np.tan(turns / 2.0)
        for i in range(n):
            if trim[i] + trim[(i + 1) % n] >= elen[i] - 1e-12:
                raise ValueError(
                    f"corner radius {corner_radius} too large for edge {i} "
                    f"(length {elen[i]})")
        # tangent points and arc centers
        t_end = verts + trim[:, None] * units          # arc exit at vertex i
        t_start = np.roll(verts, -1, axis=0) - np.roll(trim, -1)[:, None] * units
        lefts = np.stack([-units[:, 1], units[:, 0]], axis=1)
        centers = np.empty((n, 2))
        a0 = np.empty(n)
        for i in range(n):
            tp = verts[i] - trim[i] * units[i - 1]     # arc entry on incoming edge
            centers[i] = tp + corner_radius * lefts[i - 1]
            a0[i] = math.atan2(tp[1] - centers[i][1], tp[0] - centers[i][0])
        # pieces: half edge 0, then [arc i+1, edge i+1] ... ending with half edge 0
        mid = 0.5 * (t_end[0] + t_start[0])
        pieces = []  # (type, length, geo...)
        first_len = float(np.hypot(*(t_start[0] - mid)))
        pieces.append((0.0, first_len, mid[0], mid[1], units[0][0], units[0][1]))
        for j in range(1, n + 1):
            i = j % n
            pieces.append((1.0, corner_radius * turns[i],
                           centers[i][0], centers[i][1], corner_radius, a0[i], turns[i]))
            if j < n:
                seg = t_start[i] - t_end[i]
                pieces.append((0.0, float(np.hypot(*seg)),
                               t_end[i][0], t_end[i][1], units[i][0], units[i][1]))
        pieces.append((0.0, float(np.hypot(*(mid - t_end[0]))),
                       t_end[0][0], t_end[0][1], units[0][0], units[0][1]))
        ltot = sum(p[1] for p in pieces)
        data = [ltot, float(len(pieces))]
        acc = 0.0
        for p in pieces:
            s0 = acc / ltot
            acc += p[1]
            s1 = acc / ltot
            row = [p[0], s0, s1] + list(p[2:])
            row += [0.0] * (10 - len(row))
            data.extend(row)
        data[2 + 10 * (len(pieces) - 1) + 2] = 1.0  # pin the last breakpoint exactly
        self._data = np.array(data)

    def pack_parts(self):
        return (kernels.CURVE_ROUNDRECT, self._data,
                np.zeros(0), np.zeros((4, 0)), np.zeros((4, 0)))

    def mirror_y(self) -> "RoundedPolygon":
        flipped = self.vertices[::-1].copy()
        flipped[:, 1] = -flipped[:, 1]
        return RoundedPolygon(flipped, self.corner_radius)

    def __eq__(self, other):
        return (isinstance(other, RoundedPolygon)
                and np.array_equal(self.vertices, other.vertices)
                and self.corner_radius == other.corner_radius)


ReferenceCurve = Circle | Ellipse | PeriodicSpline | RoundedPolygon


# ---------------------------------------------------------------------------
# field containers


class FrameFields(NamedTuple):
    """Boundary fields at one (s, t): geometry plus Eulerian motion."""

    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray   # inward (domain side)
    kappa: float
    metric: float        # |d boundary / d s|
    velocity: np.ndarray
    accel: np.ndarray
    v_n: float
    v_t: float
    a_n: float
    sigma: float


class BoundaryKinematics(NamedTuple):
    """FrameFields completed with the robot-relative terms."""

    r_star: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    kappa: float
    v_n: float
    v_t: float
    a_n: float
    sigma: float
    xi: float
    s_dot: float
    mu: float


class FieldGrid(NamedTuple):
    """Boundary fields sampled on a (time x parameter) grid."""

    s_grid: np.ndarray
    t_grid: np.ndarray
    a_n: np.ndarray
    v_n: np.ndarray
    v_t: np.ndarray
    sigma: np.ndarray
    kappa: np.ndarray
    metric: np.ndarray


def _polyline_is_simple(points: np.ndarray) -> bool:
    """Proper-crossing test over all non-adjacent segment pairs (closed)."""
    n = points.shape[0]
    a = points
    b = np.roll(points, -1, axis=0)
    d = b - a
    for i in range(n - 2):
        j0 = i + 2
        j1 = n if i > 0 else n - 1  # segment 0 is adjacent to segment n-1
        if j0 >= j1:
            continue
        aj = a[j0:j1]; dj = d[j0:j1]
        rel = aj - a[i]
        denom = d[i, 0] * dj[:, 1] - d[i, 1] * dj[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            ti = (rel[:, 0] * dj[:, 1] - rel[:, 1] * dj[:, 0]) / denom
            tj = (rel[:, 0] * d[i, 1] - rel[:, 1] * d[i, 0]) / denom
        hit = (np.abs(denom) > 1e-15) & (ti > 0) & (ti < 1) & (tj > 0) & (tj < 1)
        if hit.any():
            return False
    return True


class ObstacleModel:
    """Reference curve + primitive chain. Immutable after construction."""

    def __init__(self, curve: ReferenceCurve, primitives: Sequence[Primitive] = (),
                 name: str = ""):
        self.curve = curve
        self.primitives = tuple(primitives)
        self.name = name
        kind, data, ts, cx, cy = curve.pack_parts()
        if self.primitives:
            pk = np.array([p.kind for p in self.primitives], dtype=np.int64)
            pp = np.stack([p.params_row() for p in self.primitives])
        else:
            pk = np.zeros(0, dtype=np.int64)
            pp = np.zeros((0, kernels.PRIM_ROW))
        self._pack = (kind, data, ts, cx, cy, pk, pp)

    def kernel_pack(self):
        return self._pack

    def __eq__(self, other):
        return (isinstance(other, ObstacleModel) and self.curve == other.curve
                and self.primitives == other.primitives and self.name == other.name)

    def is_static(self) -> bool:
        """True when every primitive profile is constant in time."""
        for prim in self.primitives:
            for field in prim:
                if isinstance(field, TimeProfile):
                    if field.slope != 0.0 or (field.amp != 0.0 and field.omega != 0.0):
                        return False
        return True

    def mirror_y(self) -> "ObstacleModel":
        return ObstacleModel(self.curve.mirror_y(),
                             [p.mirror_y() for p in self.primitives], self.name)

    # -- evaluation ---------------------------------------------------------

    def boundary_point(self, s: float, t: float) -> np.ndarray:
        return kernels.eval_positions(self._pack, np.array([s], dtype=np.float64), t)[0]

    def boundary_points(self, s, t: float) -> np.ndarray:
        return kernels.eval_positions(self._pack, np.asarray(s, dtype=np.float64), t)

    def frame_fields(self, s: float, t: float) -> FrameFields:
        p, ps, pss, pt, ptt, pst = kernels.eval_bundle(
            self._pack, np.array([s], dtype=np.float64), t)
        p, ps, pss, pt, ptt, pst = p[0], ps[0], pss[0], pt[0], ptt[0], pst[0]
        metric = math.hypot(ps[0], ps[1])
        if metric < 1e-10:
            raise DegenerateTangentError(f"boundary tangent degenerate at s={s}, t={t}")
        tangent = ps / metric
        normal = np.array([-tangent[1], tangent[0]])
        kappa = (ps[0] * pss[1] - ps[1] * pss[0]) / metric ** 3
        v_n = pt[0] * normal[0] + pt[1] * normal[1]
        v_t = pt[0] * tangent[0] + pt[1] * tangent[1]
        a_n = ptt[0] * normal[0] + ptt[1] * normal[1]
        sigma = (pst[0] * normal[0] + pst[1] * normal[1]) / metric
        return FrameFields(p, tangent, normal, float(kappa), metric, pt, ptt,
                           float(v_n), float(v_t), float(a_n), float(sigma))

    def frenet_and_curvature(self, s: float, t: float):
        ff = self.frame_fields(s, t)
        return ff.tangent, ff.normal, ff.kappa

    def sigma(self, s: float, t: float) -> float:
        return self.frame_fields(s, t).sigma

    def velocity_at_param(self, s: float, t: float) -> np.ndarray:
        _, _, _, pt, _, _ = kernels.eval_bundle(self._pack, np.array([s]), t)
        return pt[0]

    def acceleration_at_param(self, s: float, t: float) -> np.ndarray:
        _, _, _, _, ptt, _ = kernels.eval_bundle(self._pack, np.array([s]), t)
        return ptt[0]

    def _project(self, point, t: float, tol: float) -> float:
        s, dist, conv, _, _ = kernels.nearest_param(
            self._pack, float(point[0]), float(point[1]), t, 720, 20, 1e-12)
        if not conv or dist > tol:
            raise ProjectionError(
                f"point {tuple(point)} is {dist} m from the boundary (tol {tol})")
        return s

    def eulerian_velocity(self, point, t: float, tol: float = 1e-6) -> np.ndarray:
        return self.velocity_at_param(self._project(point, t, tol), t)

    def eulerian_acceleration(self, point, t: float, tol: float = 1e-6) -> np.ndarray:
        return self.acceleration_at_param(self._project(point, t, tol), t)

    def field_grid(self, s_grid, t_grid) -> FieldGrid:
        s_grid = np.asarray(s_grid, dtype=np.float64)
        t_grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
        nt, ns = t_grid.size, s_grid.size
        out = {k: np.empty((nt, ns)) for k in ("a_n", "v_n", "v_t", "sigma", "kappa", "metric")}
        for j, t in enumerate(t_grid):
            p, ps, pss, pt, ptt, pst = kernels.eval_bundle(self._pack, s_grid, float(t))
            metric = np.hypot(ps[:, 0], ps[:, 1])
            if np.any(metric < 1e-10):
                raise DegenerateTangentError(f"degenerate tangent in field grid at t={t}")
            tx, ty = ps[:, 0] / metric, ps[:, 1] / metric
            nx, ny = -ty, tx
            out["metric"][j] = metric
            out["kappa"][j] = (ps[:, 0] * pss[:, 1] - ps[:, 1] * pss[:, 0]) / metric ** 3
            out["v_n"][j] = pt[:, 0] * nx + pt[:, 1] * ny
            out["v_t"][j] = pt[:, 0] * tx + pt[:, 1] * ty
            out["a_n"][j] = ptt[:, 0] * nx + ptt[:, 1] * ny
            out["sigma"][j] = (pst[:, 0] * nx + pst[:, 1] * ny) / metric
        return FieldGrid(s_grid, t_grid, out["a_n"], out["v_n"], out["v_t"],
                         out["sigma"], out["kappa"], out["metric"])

    def offset_polyline(self, offset: float, t: float, n: int = 256) -> np.ndarray:
        """Equidistant curve at the given outward offset, as an (n,2) polyline."""
        s = np.arange(n) / n
        p, ps, _, _, _, _ = kernels.eval_bundle(self._pack, s, t)
        metric = np.hypot(ps[:, 0], ps[:, 1])
        nx, ny = -ps[:, 1] / metric, ps[:, 0] / metric
        return p - offset * np.stack([nx, ny], axis=1)

    # -- validation ---------------------------------------------------------

    def validate(self, horizon: float, n_t: int = 33, n_s: int = 256) -> None:
        """Raise on orientation, regularity, or deformation-validity failures
        sampled over [0, horizon].
        """
        ts = np.linspace(0.0, horizon, n_t) if horizon > 0 else np.zeros(1)
        for prim in self.primitives:
            prim.validate_times(ts)
        s = np.arange(n_s) / n_s
        ref = kernels.eval_positions(
            (self._pack[0], self._pack[1], self._pack[2], self._pack[3], self._pack[4],
             np.zeros(0, dtype=np.int64), np.zeros((0, kernels.PRIM_ROW))), s, 0.0)
        if _shoelace(ref) <= 0:
            raise ValueError("reference boundary must wind counterclockwise")
        if not _polyline_is_simple(ref):
            raise ValueError("reference boundary self-intersects")
        for t in ts:
            pts = self.boundary_points(s, float(t))
            if not _polyline_is_simple(pts):
                raise ValueError(f"deformed boundary self-intersects at t={t}")
            # frame regularity on a coarser sample
            self.field_grid(s[::4], np.array([t]))
