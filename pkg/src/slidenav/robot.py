"""Differential-drive kinematics: state/parameter types and the exact
fixed-step integrator used by the simulator.
"""

import math
from typing import NamedTuple

CONSTRAINT_TOL = 1e-12


class RobotParams(NamedTuple):
    """Physical parameters of the differential drive.

    half_axle: half distance between the wheels [m]
    wheel_radius: wheel radius [m]
    wheel_rate_max: per-wheel angular speed bound [rad/s]
    """

    half_axle: float
    wheel_radius: float
    wheel_rate_max: float

    @property
    def speed_cap(self) -> float:
        """Forward speed bound V; the actuator constraint is |v| + L|u| <= V."""
        return self.wheel_radius * self.wheel_rate_max


class RobotState(NamedTuple):
    x: float
    y: float
    theta: float


class ControlInput(NamedTuple):
    v: float  # forward speed [m/s]
    u: float  # turn rate [rad/s]


def wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    return math.pi - (math.pi - theta) % (2.0 * math.pi)


def check_input(control: ControlInput, params: RobotParams) -> None:
    """Raise if the wheel-speed constraint |v| + L|u| <= V is violated."""
    budget = abs(control.v) + params.half_axle * abs(control.u)
    if budget > params.speed_cap + CONSTRAINT_TOL:
        raise ValueError(
            f"control ({control.v}, {control.u}) exceeds wheel budget: "
            f"|v|+L|u| = {budget} > {params.speed_cap}")


def wheel_speeds(control: ControlInput, params: RobotParams) -> tuple[float, float]:
    """(right, left) wheel angular speeds realizing the control."""
    r = params.wheel_radius
    return ((control.v + params.half_axle * control.u) / r,
            (control.v - params.half_axle * control.u) / r)


def control_from_wheels(omega_r: float, omega_l: float, params: RobotParams) -> ControlInput:
    r = params.wheel_radius
    return ControlInput(0.5 * r * (omega_r + omega_l),
                        0.5 * r * (omega_r - omega_l) / params.half_axle)


def min_turning_radius(v: float, params: RobotParams) -> float:
    """Tightest arc radius available at speed v under the wheel budget."""
    headroom = params.speed_cap - abs(v)
    if headroom <= 0.0:
        return math.inf
    return params.half_axle * abs(v) / headroom


def _sinc(x: float) -> float:
    # series fallback keeps the u -> 0 limit exact to machine precision
    if abs(x) < 1e-8:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


def step_kinematics(state: RobotState, control: ControlInput,
                    params: RobotParams, dt: float) -> RobotState:
    """Advance one step holding (v, u) constant; exact arc, no drift at u=0."""
    check_input(control, params)
    half = 0.5 * control.u * dt
    chord = control.v * dt * _sinc(half)
    mid = state.theta + half
    return RobotState(state.x + chord * math.cos(mid),
                      state.y + chord * math.sin(mid),
                      wrap_angle(state.theta + control.u * dt))
