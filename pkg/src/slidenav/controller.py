"""Hybrid navigation law: sliding-mode obstacle bypass + straight pursuit,
with the switching predicates and the reversed-sign variant.

All functions are pure; the only state is the Mode value carried by the
simulation loop.
"""

import enum
import math
from typing import NamedTuple

from .robot import ControlInput, RobotParams, wrap_angle
from .sensing import SensorReading

NORMAL = "normal"
REVERSED = "reversed"


class Mode(enum.IntEnum):
    PURSUIT = 0
    AVOIDANCE = 1


class ControllerParams(NamedTuple):
    """Navigation parameters.

    gamma/delta shape the saturated linear convergence rate chi; d0 is the
    desired bypass distance with safety floor d_safe and corridor
    [d_minus, d_plus]; d_av is the avoidance trigger distance; v0/v_cr are the
    bypass/cruise speeds blended between d0_Y and d_cr; sensor_range defaults
    to d_cr. epsilon_bl > 0 replaces the relay by a boundary-layer ramp
    (experiments only, default off).
    """

    gamma: float
    delta: float
    d0: float
    d_safe: float
    d_av: float
    d_minus: float
    d_plus: float
    v0: float
    v_cr: float
    d0_y: float
    d_cr: float
    sign_variant: str = NORMAL
    theta_tol: float = 0.02
    r_reach: float = 0.05
    sensor_range: float = -1.0  # -1: default to d_cr
    epsilon_bl: float = 0.0

    @property
    def v_star(self) -> float:
        """Saturation level of chi."""
        return self.gamma * self.delta

    @property
    def range_limit(self) -> float:
        return self.d_cr if self.sensor_range < 0 else self.sensor_range

    def validate(self, robot: RobotParams | None = None) -> None:
        """Raise ValueError naming the violated invariant."""
        if not (self.gamma > 0 and self.delta > 0):
            raise ValueError(f"need gamma > 0 and delta > 0, got {self.gamma}, {self.delta}")
        if not (self.d_safe < self.d_minus < self.d0 < self.d_plus):
            raise ValueError(
                "corridor ordering violated: need d_safe < d_minus < d0 < d_plus, "
                f"got {self.d_safe}, {self.d_minus}, {self.d0}, {self.d_plus}")
        if not (self.d0 < self.d_av <= self.d0_y):
            raise ValueError(
                f"need d_av in (d0, d0_Y], got d_av={self.d_av}, d0={self.d0}, d0_Y={self.d0_y}")
        if not (self.d0 < self.d0_y < self.d_cr):
            raise ValueError(
                f"speed-blend knots need d0 < d0_Y < d_cr, got {self.d0}, {self.d0_y}, {self.d_cr}")
        if not (0.0 < self.v0 < self.v_cr):
            raise ValueError(f"need 0 < v0 < v_cr, got v0={self.v0}, v_cr={self.v_cr}")
        if robot is not None and not (self.v_cr < robot.speed_cap):
            raise ValueError(
                f"cruise speed must stay below the wheel budget: v_cr={self.v_cr} "
                f">= V={robot.speed_cap}")
        if self.range_limit < self.d_cr:
            raise ValueError(
                f"sensor range {self.range_limit} must cover d_cr={self.d_cr}")
        if self.sign_variant not in (NORMAL, REVERSED):
            raise ValueError(f"sign_variant must be normal|reversed, got {self.sign_variant!r}")
        if not (self.theta_tol > 0 and self.r_reach > 0):
            raise ValueError("theta_tol and r_reach must be positive")
        if self.epsilon_bl < 0:
            raise ValueError("epsilon_bl must be >= 0")


def chi(params: ControllerParams, z: float) -> float:
    """Saturated linear rate: gamma*z inside |z| <= delta, +-v_star outside."""
    if z > params.delta:
        return params.v_star
    if z < -params.delta:
        return -params.v_star
    return params.gamma * z


def upsilon(params: ControllerParams, d: float) -> float:
    """Distance-gated speed: v0 up to d0_Y, v_cr beyond d_cr, quintic
    smoothstep (C2 at both knots) in between.
    """
    if d <= params.d0_y:
        return params.v0
    if d >= params.d_cr:
        return params.v_cr
    x = (d - params.d0_y) / (params.d_cr - params.d0_y)
    w = x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    return params.v0 + (params.v_cr - params.v0) * w


def upsilon_rate(params: ControllerParams, d: float) -> float:
    """d upsilon / d d."""
    if d <= params.d0_y or d >= params.d_cr:
        return 0.0
    span = params.d_cr - params.d0_y
    x = (d - params.d0_y) / span
    return (params.v_cr - params.v0) * 30.0 * x * x * (x - 1.0) * (x - 1.0) / span


def surface_value(params: ControllerParams, d: float, d_dot: float) -> float:
    """S = d_dot + chi(d - d0); the relay argument."""
    return d_dot + chi(params, d - params.d0)


def relay(params: ControllerParams, s_value: float) -> float:
    """sgn(S) with sgn(0) := 0; optional boundary-layer ramp."""
    if params.epsilon_bl > 0.0:
        return max(-1.0, min(1.0, s_value / params.epsilon_bl))
    if s_value > 0.0:
        return 1.0
    if s_value < 0.0:
        return -1.0
    return 0.0


def variant_sign(params: ControllerParams) -> float:
    return 1.0 if params.sign_variant == NORMAL else -1.0


def avoidance_law(params: ControllerParams, robot: RobotParams,
                  reading: SensorReading) -> ControlInput:
    """Relay turn at full wheel budget toward the bypass surface.

    |v| + L|u| hits the budget exactly whenever the relay is nonzero.
    """
    v = upsilon(params, reading.d)
    s_value = surface_value(params, reading.d, reading.d_dot)
    u = variant_sign(params) * (robot.speed_cap - v) / robot.half_axle * relay(params, s_value)
    return ControlInput(v, u)


def pursuit_law(params: ControllerParams, robot: RobotParams,
                reading: SensorReading) -> ControlInput:
    """Straight run at the distance-gated speed (cruise when blind)."""
    v = upsilon(params, reading.d) if reading.in_range else params.v_cr
    return ControlInput(v, 0.0)


def launch_turn(params: ControllerParams, robot: RobotParams) -> ControlInput:
    """The scripted maximal turn that starts an avoidance maneuver: full
    wheel budget at bypass speed, turning away per the variant.
    """
    u_bar = (robot.speed_cap - params.v0) / robot.half_axle
    return ControlInput(params.v0, -variant_sign(params) * u_bar)


def heading_error(theta: float, heading) -> float:
    """Signed angle from the robot axis to the target heading, in (-pi, pi]."""
    return wrap_angle(math.atan2(heading[1], heading[0]) - theta)


def switch_mode(params: ControllerParams, mode: Mode, reading: SensorReading,
                theta: float) -> Mode:
    """Apply the two switching predicates verbatim; nan readings never switch.

    Pursuit -> Avoidance: d <= d_av and S <= 0.
    Avoidance -> Pursuit: headed to target within theta_tol and S >= 0.
    """
    if mode == Mode.PURSUIT:
        if reading.in_range and reading.d <= params.d_av:
            if surface_value(params, reading.d, reading.d_dot) <= 0.0:
                return Mode.AVOIDANCE
        return Mode.PURSUIT
    if reading.in_range:
        aligned = abs(heading_error(theta, reading.heading)) <= params.theta_tol
        if aligned and surface_value(params, reading.d, reading.d_dot) >= 0.0:
            return Mode.PURSUIT
    return Mode.AVOIDANCE
