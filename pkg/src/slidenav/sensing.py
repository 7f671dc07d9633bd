"""Robot-side measurements: nearest obstacle point, distance and its rate,
target heading. These are the only quantities the control law consumes.
"""

import math
import warnings
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .obstacle import (BoundaryKinematics, DegenerateTangentError, FrameFields,
                       ObstacleModel)


class InsideObstacleError(RuntimeError):
    """The query point lies inside the moving domain: physical failure state."""


class AmbiguousNearestWarning(UserWarning):
    """Two distinct boundary points tie for the minimum distance."""


class NearestPoint(NamedTuple):
    s: float
    point: np.ndarray
    distance: float
    ambiguous: bool
    s_second: float  # nan unless ambiguous


class SensorReading(NamedTuple):
    """What the controller is allowed to see.

    d and d_dot are nan when the obstacle is outside sensor range.
    """

    d: float
    d_dot: float
    heading: np.ndarray  # unit vector toward the target
    in_range: bool


class SenseResult(NamedTuple):
    """Full simulator-side measurement bundle for one step."""

    reading: SensorReading
    s_star: float
    distance: float        # ground truth, valid regardless of range
    distance_rate: float
    fields: FrameFields
    ambiguous: bool


N_SCAN = 720
NEWTON_ITERS = 20
NEWTON_TOL = 1e-12
TIE_TOL = 1e-9


def _nearest_fields(model: ObstacleModel, r, t: float):
    """Shared hot path: one fused kernel call, inside check, field bundle."""
    (s, dist, converged, ambiguous, s2, px, py, tx, ty, nx, ny, kappa, metric,
     vx, vy, ax, ay, v_n, v_t, a_n, sigma) = kernels.nearest_fields(
        model.kernel_pack(), float(r[0]), float(r[1]), t,
        N_SCAN, NEWTON_ITERS, NEWTON_TOL)
    if metric < 1e-10:
        raise DegenerateTangentError(f"boundary tangent degenerate at s={s}, t={t}")
    if not converged:
        # Newton stalled (e.g. exactly at a curvature center); the scan minimum
        # still bounds the distance, refuse to return silently wrong data
        warnings.warn(f"nearest-point refinement did not converge at t={t}",
                      AmbiguousNearestWarning, stacklevel=3)
    if (r[0] - px) * nx + (r[1] - py) * ny > 0.0:
        raise InsideObstacleError(
            f"point ({r[0]}, {r[1]}) is inside the obstacle at t={t}")
    if ambiguous:
        warnings.warn(
            f"ambiguous nearest point at t={t}: s={s} and s={s2} tie at d={dist}",
            AmbiguousNearestWarning, stacklevel=3)
    ff = FrameFields(np.array([px, py]), np.array([tx, ty]), np.array([nx, ny]),
                     kappa, metric, np.array([vx, vy]), np.array([ax, ay]),
                     v_n, v_t, a_n, sigma)
    return s, dist, bool(ambiguous), s2, ff


def nearest_point(model: ObstacleModel, r, t: float) -> NearestPoint:
    """Global nearest boundary point via dense scan + Newton polish.

    Ties within 1e-9 m between separated boundary arcs resolve to the smaller
    parameter and raise AmbiguousNearestWarning. Raises InsideObstacleError
    when r lies inside the domain.
    """
    s, dist, ambiguous, s2, ff = _nearest_fields(model, r, t)
    return NearestPoint(s, ff.point, dist, ambiguous, s2)


def distance_rate(model: ObstacleModel, r, r_dot, t: float,
                  nearest: Optional[NearestPoint] = None) -> float:
    """d/dt of the minimal distance: <V - r_dot, N> at the nearest point
    (N inward, so receding robots give positive rate).
    """
    if nearest is None:
        nearest = nearest_point(model, r, t)
    ff = model.frame_fields(nearest.s, t)
    return float(ff.v_n - (r_dot[0] * ff.normal[0] + r_dot[1] * ff.normal[1]))


def target_heading(r, target) -> np.ndarray:
    hx = target[0] - r[0]
    hy = target[1] - r[1]
    norm = math.hypot(hx, hy)
    if norm < 1e-12:
        raise ValueError("heading undefined: robot is at the target")
    return np.array([hx / norm, hy / norm])


def at_target(r, target, reach_radius: float) -> bool:
    return math.hypot(target[0] - r[0], target[1] - r[1]) <= reach_radius


def relative_motion(model: ObstacleModel, s_star: float, t: float,
                    r, r_dot) -> BoundaryKinematics:
    """Complete the boundary fields with the robot-relative terms:
    xi (tangential speed relative to the moving boundary), the induced
    nearest-point arclength rate, and the combined turning density mu.
    """
    ff = model.frame_fields(s_star, t)
    d = math.hypot(r[0] - ff.point[0], r[1] - ff.point[1])
    xi = (r_dot[0] * ff.tangent[0] + r_dot[1] * ff.tangent[1]) - ff.v_t
    denom = 1.0 + ff.kappa * d
    if denom <= 0.0:
        raise ValueError(
            f"nearest point not locally unique: 1 + kappa*d = {denom} at s={s_star}")
    s_dot = (xi - d * ff.sigma) / denom
    mu = ff.sigma + ff.kappa * s_dot
    return BoundaryKinematics(ff.point, ff.tangent, ff.normal, ff.kappa,
                              ff.v_n, ff.v_t, ff.a_n, ff.sigma,
                              float(xi), float(s_dot), float(mu))


def sense(model: ObstacleModel, r, theta: float, v: float, target,
          t: float, sensor_range: float) -> SenseResult:
    """One full measurement: nearest point, distance rate, target heading.

    The SensorReading inside masks d and d_dot with nan beyond sensor range;
    the outer fields keep ground truth for recording.
    """
    s, dist, ambiguous, _, ff = _nearest_fields(model, r, t)
    r_dot = (v * math.cos(theta), v * math.sin(theta))
    d_dot = float(ff.v_n - (r_dot[0] * ff.normal[0] + r_dot[1] * ff.normal[1]))
    h = target_heading(r, target)
    in_range = dist <= sensor_range
    reading = SensorReading(dist if in_range else math.nan,
                            d_dot if in_range else math.nan,
                            h, in_range)
    return SenseResult(reading, s, dist, d_dot, ff, ambiguous)
