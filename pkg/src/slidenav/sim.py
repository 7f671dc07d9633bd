"""Fixed-step simulation of the hybrid navigation law.

Step order is pinned: sense -> switch mode -> compute control -> record row ->
integrate. Terminal conditions are evaluated on the freshly sensed state, and
the terminal row is recorded with zero command. Identical scenarios produce
bit-identical traces under the same kernel backend.
"""

import math
from typing import NamedTuple

import numpy as np

from . import kernels, sensing
from .controller import (Mode, avoidance_law, pursuit_law, surface_value,
                         switch_mode, upsilon, variant_sign)
from .robot import ControlInput, RobotParams, RobotState, step_kinematics
from .scenario import Scenario
from .sensing import SensorReading
from .trace import COLUMNS, Event, Trace

TARGET_REACHED = "TargetReached"
COLLISION = "Collision"
HORIZON_EXPIRED = "HorizonExpired"


class RunOutcome(NamedTuple):
    outcome: str
    reason: str
    t_final: float
    state: RobotState
    steps: int
    min_distance: float
    trace: Trace


class ReplayResult(NamedTuple):
    match: bool
    first_mismatch_row: int
    message: str


def _trace_meta(sc: Scenario, outcome: str) -> dict:
    c, r = sc.control, sc.robot
    return {
        "scenario": sc.content_hash(),
        "backend": kernels.BACKEND,
        "outcome": outcome,
        "variant": c.sign_variant,
        "dt": sc.dt, "horizon": sc.horizon,
        "gamma": c.gamma, "delta": c.delta, "d0": c.d0, "d_safe": c.d_safe,
        "d_av": c.d_av, "d_minus": c.d_minus, "d_plus": c.d_plus,
        "v0": c.v0, "v_cr": c.v_cr, "d0_y": c.d0_y, "d_cr": c.d_cr,
        "theta_tol": c.theta_tol, "r_reach": c.r_reach,
        "sensor_range": c.range_limit, "epsilon_bl": c.epsilon_bl,
        "half_axle": r.half_axle, "wheel_radius": r.wheel_radius,
        "wheel_rate_max": r.wheel_rate_max,
        "target_x": sc.target[0], "target_y": sc.target[1],
    }


def run(sc: Scenario) -> RunOutcome:
    """Simulate one scenario to its terminal condition.

    Precondition: sc.validate() passed (load() guarantees it). Raises nothing
    on physical failure; collisions are reported as an outcome.
    """
    robot, ctrl, obs = sc.robot, sc.control, sc.obstacle
    dt = sc.dt
    n_max = int(math.floor(sc.horizon / dt + 1e-9)) + 2
    data = np.empty((n_max, len(COLUMNS)))
    events: list[Event] = []
    state = sc.start
    mode = Mode.PURSUIT
    range_limit = ctrl.range_limit
    # fallback matches the turn direction a fresh avoidance maneuver would take
    last_u_sign = -variant_sign(ctrl)
    blind_armed = False
    last_switch_step = -10
    was_ambiguous = False
    min_d = math.inf
    row = 0
    outcome = reason = None
    t = 0.0

    pack = obs.kernel_pack()
    tgt_x, tgt_y = float(sc.target[0]), float(sc.target[1])

    while True:
        t = row * dt
        rx, ry = state.x, state.y
        (s_star, dist, _, ambiguous, _, px, py, tx, ty, nx, ny, kappa, metric,
         _, _, _, _, v_n, v_t, a_n, sigma) = kernels.nearest_fields(
            pack, rx, ry, t, sensing.N_SCAN, sensing.NEWTON_ITERS, sensing.NEWTON_TOL)
        if (rx - px) * nx + (ry - py) * ny > 0.0:
            outcome, reason = COLLISION, "robot inside obstacle"
            events.append(Event(t, "collision", reason))
            break
        if dist < min_d:
            min_d = dist
        if ambiguous and not was_ambiguous:
            events.append(Event(t, "ambiguous_nearest", f"s={s_star}"))
        was_ambiguous = bool(ambiguous)

        in_range = dist <= range_limit
        hx = tgt_x - rx
        hy = tgt_y - ry
        to_target = math.hypot(hx, hy)
        hx /= to_target
        hy /= to_target
        v_cmd = upsilon(ctrl, dist) if in_range else ctrl.v_cr
        cth = math.cos(state.theta)
        sth = math.sin(state.theta)
        d_dot = v_n - v_cmd * (cth * nx + sth * ny)
        s_val = surface_value(ctrl, dist, d_dot) if in_range else math.nan

        terminal = None
        if dist < ctrl.d_safe:
            terminal = (COLLISION, f"d={dist} fell below d_safe={ctrl.d_safe}")
        elif to_target <= ctrl.r_reach:
            terminal = (TARGET_REACHED, f"within r_reach={ctrl.r_reach} of target")
        elif t >= sc.horizon - 1e-12:
            terminal = (HORIZON_EXPIRED, f"t={t} reached horizon={sc.horizon}")

        # robot-relative boundary terms for the record
        xi = v_cmd * (cth * tx + sth * ty) - v_t
        denom = 1.0 + kappa * dist
        if denom > 1e-12:
            s_dot_rel = (xi - dist * sigma) / denom
            mu = sigma + kappa * s_dot_rel
        else:
            s_dot_rel = mu = math.nan

        if terminal is not None:
            control = ControlInput(0.0, 0.0)
            new_mode = mode
        elif mode == Mode.AVOIDANCE and not in_range:
            # cannot happen under the feasibility conditions; degrade gracefully
            if not blind_armed:
                blind_armed = True
                new_mode = Mode.AVOIDANCE
                u_hold = last_u_sign * (robot.speed_cap - ctrl.v_cr) / robot.half_axle
                control = ControlInput(ctrl.v_cr, u_hold)
                events.append(Event(t, "blind_avoidance", "holding last turn sign"))
            else:
                new_mode = Mode.PURSUIT
                control = ControlInput(ctrl.v_cr, 0.0)
                events.append(Event(t, "blind_avoidance_exit", "forced pursuit"))
                last_switch_step = row
        else:
            blind_armed = False
            reading = SensorReading(dist if in_range else math.nan,
                                    d_dot if in_range else math.nan,
                                    (hx, hy), in_range)
            new_mode = switch_mode(ctrl, mode, reading, state.theta)
            if new_mode != mode:
                kind = "enter_avoidance" if new_mode == Mode.AVOIDANCE else "enter_pursuit"
                events.append(Event(t, kind, f"d={dist} s_value={s_val}"))
                if row - last_switch_step <= 2:
                    events.append(Event(t, "switch_chatter",
                                        f"flip within {row - last_switch_step} steps"))
                last_switch_step = row
            if new_mode == Mode.AVOIDANCE:
                control = avoidance_law(ctrl, robot, reading)
            else:
                control = pursuit_law(ctrl, robot, reading)

        if new_mode == Mode.AVOIDANCE and control.u != 0.0:
            last_u_sign = 1.0 if control.u > 0 else -1.0

        data[row] = (t, rx, ry, state.theta, control.v, control.u,
                     float(new_mode), float(in_range), dist, d_dot, hx, hy,
                     s_val, s_star, metric, px, py,
                     tx, ty, nx, ny, kappa, v_n, v_t, a_n,
                     sigma, xi, s_dot_rel, mu)
        row += 1
        if terminal is not None:
            outcome, reason = terminal
            events.append(Event(t, "terminal", f"{outcome}: {reason}"))
            break
        mode = new_mode
        state = step_kinematics(state, control, robot, dt)

    trace = Trace(data[:row].copy(), _trace_meta(sc, outcome), events)
    return RunOutcome(outcome, reason, t, state, row, min_d, trace)


def run_scripted(robot: RobotParams, start: RobotState, control: ControlInput,
                 dt: float, n_steps: int) -> np.ndarray:
    """Integrate a constant control; returns (n_steps+1, 3) poses."""
    out = np.empty((n_steps + 1, 3))
    state = start
    out[0] = state
    for i in range(n_steps):
        state = step_kinematics(state, control, robot, dt)
        out[i + 1] = state
    return out


def replay(trace: Trace, sc: Scenario) -> ReplayResult:
    """Re-run the scenario and compare row-for-row (bitwise, nan == nan).

    Requires the same kernel backend as the recording; cross-backend replay is
    refused rather than reported as a drift.
    """
    backend = trace.meta.get("backend", "")
    if backend != kernels.BACKEND:
        raise ValueError(
            f"trace was recorded under backend {backend!r}; current backend "
            f"is {kernels.BACKEND!r}; replay must use the same backend")
    want_hash = trace.meta.get("scenario", "")
    have_hash = sc.content_hash()
    if want_hash != have_hash:
        raise ValueError(
            f"trace belongs to scenario {want_hash}, not {have_hash}")
    fresh = run(sc).trace
    if fresh.data.shape != trace.data.shape:
        return ReplayResult(False, min(len(fresh), len(trace)),
                            f"row count differs: {len(trace)} recorded, {len(fresh)} replayed")
    same = np.all((fresh.data == trace.data)
                  | (np.isnan(fresh.data) & np.isnan(trace.data)), axis=1)
    if bool(same.all()):
        return ReplayResult(True, -1, "exact match")
    first = int(np.argmin(same))
    return ReplayResult(False, first, f"first mismatch at row {first}")
