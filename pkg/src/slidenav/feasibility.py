"""Feasibility checks and relay-gain tuning for bypass scenarios.

The avoidance guarantees rest on grid-checkable inequalities tying the
obstacle's boundary motion to the robot's speed and turn-rate budget:

    normal-speed bound   |V_N| <= lambda_v * v0,               lambda_v < 1
    turn-rate bound      |A| * L / sqrt(v0^2 - V_N^2) + v0 <= lambda_a * V
    tangent headroom     sqrt(v0^2 - V_N^2) >= |V_T + d*sigma| + eps_v
    curvature clearance  1 + d_hi * kappa > margin_floor   (concave points)

where A is the normal acceleration demand of a constant-distance bypass
(see bypass_kinematics). A is a first-degree rational function of d, so the
corridor endpoints suffice for the turn-rate scan; |V_T + d*sigma| is affine
in d, so endpoints suffice for the headroom scan as well.

The smallest feasible coefficients are measured on the grid, margined
(eta_* takes half the remaining headroom to 1), and turned into a budget
z_star for distance-rate perturbations: the largest z such that the turn
demand stays below (lambda_a + eta_a)*V for every rate offset in
[-z, z]. The relay gains then must satisfy

    v_star = gamma * delta <= min(eta_v * v0, z_star)            (non-strict)
    (lambda_a + eta_a)
        + gamma*L*v_star / (v0*(V - v0)*sqrt(1 - (lambda_v+eta_v)^2)) < 1

and suggest_delta() returns the largest delta meeting both for a given gamma.

Launch arcs (the scripted full-budget turn that opens every avoidance
maneuver) are probed by forward simulation: the distance extremes they reach
widen the scan corridor, their minimum must clear d_safe, and the winding of
the line of sight to the nearest boundary point must fall below the
turn-budget bound at some time between one and one-and-a-half turns. All
scans are finite grids; a pass is evidence at grid resolution, not proof.
"""

import math
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import kernels, sensing
from .controller import ControllerParams, launch_turn, variant_sign
from .obstacle import FieldGrid, ObstacleModel
from .robot import RobotParams, RobotState, wrap_angle
from .scenario import Scenario
from .sim import run_scripted

GRID_N_S = 360          # boundary samples per time slice
GRID_DT = 0.05          # time-slice spacing (s)
MARGIN_FLOOR = 0.05     # curvature clearance floor for 1 + d*kappa
LAMBDA_V_FLOOR = 1e-9   # keeps eta_v finite work for motionless obstacles
Z_SCREEN_SAMPLES = 33   # rate offsets screened per bisection step
Z_FINAL_SAMPLES = 129   # densified validation of the returned budget
WINDING_TOL = 1e-3      # rad, absorbs one-sample grid offset in launch arcs


class GridPoint(NamedTuple):
    """Worst-case location of a scanned inequality."""

    s: float
    t: float
    d: float
    sign: float
    value: float


class CurvatureReport(NamedTuple):
    ok: bool
    margin: float              # min of 1 + d_hi*kappa over concave points
    floor: float
    worst: Optional[GridPoint]


class MotionBounds(NamedTuple):
    """Smallest feasible bound coefficients measured on the scan grid."""

    ok: bool
    lambda_v: float
    lambda_a: float
    eps_v: float
    eta_v: float
    eta_a: float
    worst_normal_speed: Optional[GridPoint]
    worst_turn_demand: Optional[GridPoint]
    worst_headroom: Optional[GridPoint]
    violations: Tuple[str, ...]


class RateBudget(NamedTuple):
    ok: bool
    z_star: float
    bound: float               # (lambda_a + eta_a) * V
    samples: int               # rate offsets validated at the returned budget


class GainReport(NamedTuple):
    ok: bool
    speed_ok: bool             # v_star <= min(eta_v*v0, z_star)
    margin_ok: bool            # relay margin strictly below 1
    v_star: float
    v_star_cap: float
    margin_lhs: float
    delta_max: float           # largest admissible delta for this gamma
    violations: Tuple[str, ...]


class LaunchProbe(NamedTuple):
    """One scripted launch arc: 1.5 turns at full wheel budget."""

    t_start: float
    state: RobotState
    d_min: float
    d_max: float
    collision: bool
    winding_ok: bool
    t_winding: float           # earliest time (since launch) the bound holds


class LaunchReport(NamedTuple):
    ok: bool                   # safe, no collision, winding bound met
    contained: bool            # extremes within the user corridor (info only)
    safe: bool                 # pooled d_min > d_safe
    winding_ok: bool
    d_min: float
    d_max: float
    probes: Tuple[LaunchProbe, ...]


class FeasibilityReport(NamedTuple):
    ok: bool
    corridor_user: Tuple[float, float]
    corridor_scan: Tuple[float, float]   # user corridor widened by launch arcs
    curvature: CurvatureReport
    motion: MotionBounds
    budget: RateBudget
    gains: Optional[GainReport]
    launch: Optional[LaunchReport]
    violations: Tuple[str, ...]

    def as_dict(self) -> dict:
        return _plain(self._asdict())

    def format_text(self) -> str:
        lines = [f"feasibility: {'PASS' if self.ok else 'FAIL'}"]
        lines.append(f"  corridor (user)   [{self.corridor_user[0]:.6g}, "
                     f"{self.corridor_user[1]:.6g}]")
        lines.append(f"  corridor (scan)   [{self.corridor_scan[0]:.6g}, "
                     f"{self.corridor_scan[1]:.6g}]")
        c = self.curvature
        lines.append(f"  curvature margin  {c.margin:.6g} > {c.floor:g}"
                     f"  {'PASS' if c.ok else 'FAIL'}")
        m = self.motion
        lines.append(f"  normal speed      lambda_v = {m.lambda_v:.6g}"
                     f"  {'PASS' if m.lambda_v < 1 else 'FAIL'}")
        lines.append(f"  turn demand       lambda_a = {m.lambda_a:.6g}"
                     f"  {'PASS' if m.lambda_a < 1 else 'FAIL'}")
        lines.append(f"  tangent headroom  eps_v = {m.eps_v:.6g}"
                     f"  {'PASS' if m.eps_v > 0 else 'FAIL'}")
        lines.append(f"  margins           eta_v = {m.eta_v:.6g}"
                     f"  eta_a = {m.eta_a:.6g}")
        b = self.budget
        lines.append(f"  rate budget       z_star = {b.z_star:.6g}"
                     f"  (demand < {b.bound:.6g}, {b.samples} offsets)"
                     f"  {'PASS' if b.ok else 'FAIL'}")
        if self.gains is not None:
            g = self.gains
            lines.append(f"  relay gains       v_star = {g.v_star:.6g}"
                         f" <= {g.v_star_cap:.6g}"
                         f"  {'PASS' if g.speed_ok else 'FAIL'};"
                         f"  margin {g.margin_lhs:.6g} < 1"
                         f"  {'PASS' if g.margin_ok else 'FAIL'}")
            lines.append(f"  delta_max         {g.delta_max:.10g}")
        if self.launch is not None:
            la = self.launch
            lines.append(f"  launch arcs       {len(la.probes)} probes,"
                         f" d in [{la.d_min:.6g}, {la.d_max:.6g}],"
                         f" winding {'PASS' if la.winding_ok else 'FAIL'},"
                         f" safety {'PASS' if la.safe else 'FAIL'}")
        if self.violations:
            lines.append("violations:")
            for v in self.violations:
                lines.append(f"  - {v}")
        else:
            lines.append("violations: none")
        return "\n".join(lines)


def _plain(obj):
    """Recursively convert report tuples/arrays into JSON-ready types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if hasattr(obj, "_asdict"):
        return _plain(obj._asdict())
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def bypass_kinematics(fields, d: float, v: float, sign: float):
    """Tangential rate xi and normal acceleration demand of a constant-
    distance bypass at speed v and offset d from the boundary point carrying
    `fields` (anything with v_n, v_t, a_n, sigma, kappa attributes).

    sign picks the branch: +1 moves with the boundary tangent, -1 against it.
    Raises ValueError when the speed cannot outrun the boundary's normal
    motion (v^2 <= V_N^2) or the offset curve degenerates (1 + kappa*d <= 0).
    """
    disc = v * v - fields.v_n * fields.v_n
    if disc <= 0.0:
        raise ValueError(
            f"normal-speed bound violated: |V_N| = {abs(fields.v_n)} >= v = {v}")
    denom = 1.0 + fields.kappa * d
    if denom <= 0.0:
        raise ValueError(
            f"curvature clearance violated: 1 + kappa*d = {denom} <= 0")
    xi = -fields.v_t + (math.sqrt(disc) if sign >= 0 else -math.sqrt(disc))
    accel = fields.a_n + (
        2.0 * fields.sigma * xi + fields.kappa * xi * xi
        - d * fields.sigma * fields.sigma) / denom
    return xi, accel


def scan_grid(obstacle: ObstacleModel, horizon: float,
              n_s: int = GRID_N_S, dt_grid: float = GRID_DT) -> FieldGrid:
    """Boundary-field samples for the inequality scans: n_s parameters per
    slice, slices every dt_grid seconds (one slice for static obstacles).
    """
    s = np.arange(n_s) / n_s
    if obstacle.is_static():
        ts = np.zeros(1)
    else:
        ts = np.arange(0.0, horizon + 0.5 * dt_grid, dt_grid)
    return obstacle.field_grid(s, ts)


def _grid_point(grid: FieldGrid, flat_idx: int, d: float, sign: float,
                value: float) -> GridPoint:
    j, i = np.unravel_index(flat_idx, (grid.t_grid.size, grid.s_grid.size))
    return GridPoint(float(grid.s_grid[i]), float(grid.t_grid[j]),
                     float(d), float(sign), float(value))


def check_curvature_clearance(grid: FieldGrid, d_hi: float,
                              margin_floor: float = MARGIN_FLOOR) -> CurvatureReport:
    """Clearance of the widest offset curve: min(1 + d_hi*kappa) over concave
    boundary points must stay above the floor. Convex-only boundaries pass
    with margin 1. The narrow end never binds: for kappa >= 0 the expression
    exceeds 1, for kappa < 0 it shrinks as d grows.
    """
    kap = grid.kappa
    concave = kap < 0.0
    if not concave.any():
        return CurvatureReport(True, 1.0, margin_floor, None)
    vals = np.where(concave, 1.0 + d_hi * kap, np.inf)
    idx = int(vals.argmin())
    margin = float(vals.flat[idx])
    worst = _grid_point(grid, idx, d_hi, 0.0, margin)
    return CurvatureReport(margin > margin_floor, margin, margin_floor, worst)


def check_motion_bounds(grid: FieldGrid, v0: float, speed_cap: float,
                        half_axle: float, d_lo: float,
                        d_hi: float) -> MotionBounds:
    """Smallest feasible (lambda_v, lambda_a, eps_v) over the scan grid, both
    bypass branches, corridor endpoints only (endpoint sufficiency per the
    module docstring). Infeasibility is a report, not an exception.
    """
    violations = []
    abs_vn = np.abs(grid.v_n)
    i_vn = int(abs_vn.argmax())
    vn_max = float(abs_vn.flat[i_vn])
    lambda_v = max(vn_max / v0, LAMBDA_V_FLOOR)
    worst_vn = _grid_point(grid, i_vn, 0.0, 0.0, vn_max)
    if lambda_v >= 1.0:
        violations.append(
            "normal-speed bound |V_N| <= lambda_v*v0 needs lambda_v < 1: "
            f"max |V_N| = {vn_max:.6g} >= v0 = {v0:.6g} at "
            f"s={worst_vn.s:.6g}, t={worst_vn.t:.6g}")
        return MotionBounds(False, lambda_v, math.inf, -math.inf, 0.0, 0.0,
                            worst_vn, None, None, tuple(violations))

    root = np.sqrt(v0 * v0 - grid.v_n ** 2)
    lambda_a = -math.inf
    worst_turn = None
    eps_v = math.inf
    worst_head = None
    for d in (d_lo, d_hi):
        denom = 1.0 + grid.kappa * d
        if np.any(denom <= 0.0):
            i_bad = int(np.where(denom <= 0.0, denom, np.inf).argmin())
            bad = _grid_point(grid, i_bad, d, 0.0, float(denom.flat[i_bad]))
            violations.append(
                "curvature clearance 1 + kappa*d > 0 violated at "
                f"s={bad.s:.6g}, t={bad.t:.6g}, d={d:.6g}")
            return MotionBounds(False, lambda_v, math.inf, -math.inf,
                                0.0, 0.0, worst_vn, None, None,
                                tuple(violations))
        for sign in (1.0, -1.0):
            xi = -grid.v_t + sign * root
            accel = grid.a_n + (2.0 * grid.sigma * xi + grid.kappa * xi * xi
                                - d * grid.sigma ** 2) / denom
            demand = (np.abs(accel) * half_axle / root + v0) / speed_cap
            i_td = int(demand.argmax())
            if demand.flat[i_td] > lambda_a:
                lambda_a = float(demand.flat[i_td])
                worst_turn = _grid_point(grid, i_td, d, sign, lambda_a)
        slack = root - np.abs(grid.v_t + d * grid.sigma)
        i_sl = int(slack.argmin())
        if slack.flat[i_sl] < eps_v:
            eps_v = float(slack.flat[i_sl])
            worst_head = _grid_point(grid, i_sl, d, 0.0, eps_v)

    if lambda_a >= 1.0:
        violations.append(
            "turn-rate bound |A|*L/sqrt(v0^2-V_N^2) + v0 <= lambda_a*V needs "
            f"lambda_a < 1: got lambda_a = {lambda_a:.6g} at "
            f"s={worst_turn.s:.6g}, t={worst_turn.t:.6g}, d={worst_turn.d:.6g}, "
            f"sign={worst_turn.sign:+.0f}")
    if eps_v <= 0.0:
        violations.append(
            "tangent headroom sqrt(v0^2-V_N^2) >= |V_T + d*sigma| + eps_v "
            f"needs eps_v > 0: got {eps_v:.6g} at s={worst_head.s:.6g}, "
            f"t={worst_head.t:.6g}, d={worst_head.d:.6g}")

    ok = not violations
    eta_v = 0.5 * (1.0 - lambda_v) if lambda_v < 1.0 else 0.0
    eta_a = 0.5 * (1.0 - lambda_a) if lambda_a < 1.0 else 0.0
    return MotionBounds(ok, lambda_v, lambda_a, eps_v, eta_v, eta_a,
                        worst_vn, worst_turn, worst_head, tuple(violations))


def rate_perturbation_budget(grid: FieldGrid, v0: float, speed_cap: float,
                             half_axle: float, d_lo: float, d_hi: float,
                             bounds: MotionBounds) -> RateBudget:
    """Largest z_star such that the turn demand evaluated with the normal
    boundary speed offset by any z in [-z_star, z_star] stays below
    (lambda_a + eta_a)*V over the whole grid.

    Bisection at resolution 1e-4*v0 with 33 screened offsets per step; the
    returned budget is re-validated on 129 offsets and stepped down if the
    densified screen finds a violation the coarse one missed.
    """
    bound = (bounds.lambda_a + bounds.eta_a) * speed_cap
    a_n = np.ascontiguousarray(grid.a_n.ravel())
    v_n = np.ascontiguousarray(grid.v_n.ravel())
    v_t = np.ascontiguousarray(grid.v_t.ravel())
    sig = np.ascontiguousarray(grid.sigma.ravel())
    kap = np.ascontiguousarray(grid.kappa.ravel())

    def worst(z: float) -> float:
        return kernels.omega_sweep_max(a_n, v_n, v_t, sig, kap,
                                       d_lo, d_hi, v0, half_axle, z)

    def passes(z: float, n: int) -> bool:
        for zp in np.linspace(-z, z, n):
            if worst(float(zp)) >= bound:
                return False
        return True

    if worst(0.0) >= bound:
        return RateBudget(False, 0.0, bound, 1)
    resolution = 1e-4 * v0
    lo, hi = 0.0, v0 * (1.0 - bounds.lambda_v)
    if passes(hi, Z_SCREEN_SAMPLES):
        lo = hi
    else:
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if passes(mid, Z_SCREEN_SAMPLES):
                lo = mid
            else:
                hi = mid
    z_star = lo
    while z_star > 0.0 and not passes(z_star, Z_FINAL_SAMPLES):
        z_star = max(z_star - resolution, 0.0)
    return RateBudget(z_star > 0.0, z_star, bound, Z_FINAL_SAMPLES)


def check_gain_conditions(params: ControllerParams, bounds: MotionBounds,
                          budget: RateBudget,
                          robot: RobotParams) -> GainReport:
    """Relay-gain admissibility for the measured bounds: the surface slope cap
    v_star = gamma*delta against min(eta_v*v0, z_star), and the strict relay
    margin inequality. delta_max is the largest delta passing both at this
    gamma (margin part backed off 5% to keep the strict inequality).
    """
    v0, gamma = params.v0, params.gamma
    speed_cap, half_axle = robot.speed_cap, robot.half_axle
    v_star = params.v_star
    cap = min(bounds.eta_v * v0, budget.z_star)
    speed_ok = v_star <= cap
    sq = math.sqrt(1.0 - (bounds.lambda_v + bounds.eta_v) ** 2)
    coef = gamma * half_axle / (v0 * (speed_cap - v0) * sq)
    margin_lhs = bounds.lambda_a + bounds.eta_a + coef * v_star
    margin_ok = margin_lhs < 1.0
    delta_margin = (1.0 - bounds.lambda_a - bounds.eta_a) / (coef * gamma)
    delta_max = min(cap / gamma, 0.95 * delta_margin)
    violations = []
    if not speed_ok:
        violations.append(
            "relay speed bound v_star = gamma*delta <= min(eta_v*v0, z_star) "
            f"violated: {v_star:.6g} > {cap:.6g}")
    if not margin_ok:
        violations.append(
            "relay margin (lambda_a+eta_a) + gamma*L*v_star/(v0*(V-v0)"
            f"*sqrt(1-(lambda_v+eta_v)^2)) < 1 violated: {margin_lhs:.6g} >= 1")
    return GainReport(speed_ok and margin_ok, speed_ok, margin_ok, v_star,
                      cap, margin_lhs, delta_max, tuple(violations))


def suggest_delta(scenario: Scenario,
                  report: Optional["FeasibilityReport"] = None) -> float:
    """Largest admissible relay zone half-width delta for the scenario's
    gamma, derived from a full feasibility scan (reused when passed in).
    """
    if report is None:
        report = run_feasibility(scenario)
    if report.gains is None:
        raise ValueError("bounds infeasible; no admissible delta exists")
    return report.gains.delta_max


def launch_turn_times(params: ControllerParams,
                      robot: RobotParams) -> Tuple[float, float]:
    """Durations of one and one-and-a-half launch turns."""
    u_bar = (robot.speed_cap - params.v0) / robot.half_axle
    return 2.0 * math.pi / u_bar, 3.0 * math.pi / u_bar


def check_launching_motion(obstacle: ObstacleModel, start: RobotState,
                           params: ControllerParams, robot: RobotParams,
                           t_start: float = 0.0,
                           dt: float = 1e-3) -> LaunchProbe:
    """Probe one launch arc: 1.5 turns at bypass speed and full wheel budget,
    turning per the variant. Records the distance extremes, collision, and
    the earliest time in [tau_turn, tau_1.5turn] at which the net winding of
    the line of sight to the nearest boundary point drops below the
    turn-budget allowance (t - tau_turn)*u_bar.
    """
    control = launch_turn(params, robot)
    u_bar = abs(control.u)
    tau_turn, tau_15 = launch_turn_times(params, robot)
    n = int(math.ceil(tau_15 / dt - 1e-9))
    poses = run_scripted(robot, start, control, dt, n)
    pack = obstacle.kernel_pack()

    d_min, d_max = math.inf, -math.inf
    collision = False
    winding_ok = False
    t_winding = math.nan
    alpha = 0.0
    prev_ang = None
    for k in range(n + 1):
        x, y = poses[k, 0], poses[k, 1]
        tk = t_start + k * dt
        (_, dist, _, _, _, px, py, _, _, nx, ny, _, _,
         _, _, _, _, _, _, _, _) = kernels.nearest_fields(
            pack, x, y, tk, sensing.N_SCAN, sensing.NEWTON_ITERS,
            sensing.NEWTON_TOL)
        if (x - px) * nx + (y - py) * ny > 0.0:
            collision = True
            d_min = min(d_min, -dist)
            break
        d_min = min(d_min, dist)
        d_max = max(d_max, dist)
        ang = math.atan2(y - py, x - px)
        if prev_ang is not None:
            alpha += wrap_angle(ang - prev_ang)
        prev_ang = ang
        rel = k * dt
        if not winding_ok and rel >= tau_turn - 1e-12:
            if abs(alpha) <= (rel - tau_turn) * u_bar + WINDING_TOL:
                winding_ok = True
                t_winding = rel
    return LaunchProbe(t_start, start, d_min, d_max, collision,
                       winding_ok, t_winding)


def default_launch_states(obstacle: ObstacleModel, params: ControllerParams,
                          robot: RobotParams,
                          horizon: float) -> Tuple[Tuple[RobotState, float], ...]:
    """Hypothetical launch starts: 6 boundary-normal positions at d_av, with
    the heading aimed at the nearest point and offset by {0, 45, 90} degrees
    toward the side the launch turn swings away from, at start times {0,
    horizon/2} (collapsed to {0} for static obstacles). Offsets on the
    opposite side belong to the mirrored variant; its launch turn would cut
    inside the line of sight.
    """
    ts = (0.0,) if obstacle.is_static() else (0.0, 0.5 * horizon)
    sgn = variant_sign(params)
    offsets = (0.0, -sgn * math.pi / 4.0, -sgn * math.pi / 2.0)
    states = []
    for t0 in ts:
        for i in range(6):
            ff = obstacle.frame_fields(i / 6.0, t0)
            pos_x = float(ff.point[0] - params.d_av * ff.normal[0])
            pos_y = float(ff.point[1] - params.d_av * ff.normal[1])
            base = math.atan2(float(ff.normal[1]), float(ff.normal[0]))
            for off in offsets:
                states.append((RobotState(pos_x, pos_y,
                                          wrap_angle(base + off)), t0))
    return tuple(states)


def run_feasibility(scenario: Scenario,
                    launch_states: Optional[Sequence[Tuple[RobotState, float]]] = None,
                    include_default_launches: bool = True,
                    launch_dt: Optional[float] = None) -> FeasibilityReport:
    """Full pipeline: launch-arc probes widen the corridor, then curvature,
    motion bounds, rate budget, and gain conditions are scanned over the
    widened range. Launch probing covers the default hypothetical starts plus
    any caller-supplied (state, t_start) pairs; probing quantifies over a
    finite sample, stated as such in the report.
    """
    ctrl, robot, obs = scenario.control, scenario.robot, scenario.obstacle
    violations = []

    grid = scan_grid(obs, scenario.horizon)
    probe_bounds = check_motion_bounds(grid, ctrl.v0, robot.speed_cap,
                                       robot.half_axle, ctrl.d_minus,
                                       ctrl.d_plus)
    if probe_bounds.lambda_v >= 1.0:
        # too fast to outrun anywhere; launch probes would only add noise
        curvature = check_curvature_clearance(grid, ctrl.d_plus)
        return FeasibilityReport(False, (ctrl.d_minus, ctrl.d_plus),
                                 (ctrl.d_minus, ctrl.d_plus), curvature,
                                 probe_bounds, RateBudget(False, 0.0, math.nan, 0),
                                 None, None, probe_bounds.violations)

    states = list(default_launch_states(obs, ctrl, robot, scenario.horizon)
                  if include_default_launches else ())
    if launch_states:
        states.extend(launch_states)
    launch = None
    d_lo, d_hi = ctrl.d_minus, ctrl.d_plus
    if states:
        dt_probe = scenario.dt if launch_dt is None else launch_dt
        probes = tuple(check_launching_motion(obs, st, ctrl, robot,
                                              t_start=t0, dt=dt_probe)
                       for st, t0 in states)
        d_min = min(p.d_min for p in probes)
        d_max = max(p.d_max for p in probes)
        collision = any(p.collision for p in probes)
        winding_ok = all(p.winding_ok for p in probes)
        safe = (not collision) and d_min > ctrl.d_safe
        contained = d_min >= ctrl.d_minus and d_max <= ctrl.d_plus
        launch = LaunchReport(safe and winding_ok, contained, safe,
                              winding_ok, d_min, d_max, probes)
        if collision:
            violations.append("launch arc crosses the boundary "
                              f"(worst probe d_min = {d_min:.6g})")
        elif not safe:
            violations.append("launch safety d_min > d_safe violated: "
                              f"{d_min:.6g} <= {ctrl.d_safe:.6g}")
        if not winding_ok:
            violations.append(
                "launch winding bound |alpha| <= (t - tau_turn)*u_bar not met "
                "by 1.5 turns on some probe")
        d_lo = min(d_lo, max(d_min, 1e-6))
        d_hi = max(d_hi, d_max)

    curvature = check_curvature_clearance(grid, d_hi)
    if not curvature.ok:
        violations.append(
            "curvature clearance 1 + d*kappa > margin floor violated: "
            f"{curvature.margin:.6g} <= {curvature.floor:g} at "
            f"s={curvature.worst.s:.6g}, t={curvature.worst.t:.6g}")
    motion = check_motion_bounds(grid, ctrl.v0, robot.speed_cap,
                                 robot.half_axle, d_lo, d_hi)
    violations.extend(motion.violations)
    if motion.ok and curvature.ok:
        budget = rate_perturbation_budget(grid, ctrl.v0, robot.speed_cap,
                                          robot.half_axle, d_lo, d_hi, motion)
        if not budget.ok:
            violations.append(
                "rate budget empty: turn demand reaches "
                f"(lambda_a+eta_a)*V = {budget.bound:.6g} already at z = 0")
    else:
        budget = RateBudget(False, 0.0, math.nan, 0)
    gains = None
    if motion.ok and budget.ok:
        gains = check_gain_conditions(ctrl, motion, budget, robot)
        violations.extend(gains.violations)

    ok = (curvature.ok and motion.ok and budget.ok
          and gains is not None and gains.ok
          and (launch is None or launch.ok))
    return FeasibilityReport(ok, (ctrl.d_minus, ctrl.d_plus), (d_lo, d_hi),
                             curvature, motion, budget, gains, launch,
                             tuple(violations))
