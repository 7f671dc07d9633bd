"""Post-hoc verification of recorded runs, from the trace alone.

Two layers:

* Differential identity checks. The recorded columns give every term of the
  governing relations, so each can be cross-checked against finite
  differences of the recorded motion:

    velocity_decomposition  v_vec = xi*T + V - d_dot*N, xi from the measured
                            nearest-parameter drift (arc units via the metric)
    distance_accel          second difference of d against the closed-form
                            bypass acceleration with the relay term
    slide_rate              measured nearest-parameter drift against the
                            recorded analytic rate
    speed_split             (xi+V_T)^2 + (V_N-d_dot)^2 = v^2, algebra per row

  Finite-difference checks exclude +-2 samples around relay sign flips and
  mode switches (the control is discontinuous there, so the stencil spans a
  jump) and the edges of the trace. The terminal sentinel row carries zero
  command and is skipped everywhere. Once the relay is captured it flips
  sign every few samples regardless of the step size, so the exclusion
  windows blanket nearly the whole sliding segment; the stencil checks are
  informative on the approach, launch, and exit legs, and the engagement
  report carries the blanketed fraction so that accounting is visible.

* Engagement verdicts. The longest contiguous avoidance stretch is located,
  surface capture is detected (|S| within 3*K*dt for 20 consecutive steps,
  K = max surface rate), and the four conclusions are checked: safety margin
  held, distance inside the corridor after capture, convergence of d to d0
  at the engagement end, and single-signed boundary overtaking over the
  final half. Traces that end before capture are inconclusive rather than
  failed.
"""

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .trace import Trace

TOL_VELOCITY = 1e-4        # m/s, velocity decomposition residual
TOL_DISTANCE_ACCEL = 1e-3  # m/s^2, second-difference residual at dt=1e-3
TOL_SLIDE_RATE = 1e-4      # m/s, measured vs analytic boundary drift
TOL_SPEED_SPLIT = 1e-6     # relative, per-row speed split
EXCLUDE_PAD = 2            # samples dropped on each side of a discontinuity
CAPTURE_RUN = 20           # consecutive in-band samples that define capture


class IdentityCheck(NamedTuple):
    name: str
    max_residual: float
    tolerance: float
    relative: bool
    ok: bool
    n_checked: int
    n_excluded: int


class EngagementReport(NamedTuple):
    conclusive: bool
    reason: str
    start: int                 # row span of the longest avoidance stretch
    stop: int                  # inclusive end row
    capture: int               # first captured row (-1 when inconclusive)
    capture_time: float
    rate_bound: float          # K, max |dS/dt| over the engagement
    chatter: float             # max |S| after capture
    safety_ok: bool
    corridor_ok: bool
    convergence_ok: bool
    overtaking_ok: bool
    min_distance: float
    d_err_end: float
    d_rate_end: float
    excluded_fraction: float   # share of post-capture rows inside exclusion
                               # windows (near 1: relay chatter flips S every
                               # few samples once captured)

    @property
    def all_ok(self) -> bool:
        return (self.conclusive and self.safety_ok and self.corridor_ok
                and self.convergence_ok and self.overtaking_ok)


class RateFit(NamedTuple):
    rate: float                # fitted decay rate of |d - d0| (positive)
    n_points: int
    t_span: Tuple[float, float]


def exclusion_mask(trace: Trace, pad: int = EXCLUDE_PAD) -> np.ndarray:
    """True where finite-difference stencils must not be centered: around
    sign changes of the sliding value, around mode switches, and at the
    trace edges including the terminal sentinel row.
    """
    s_val = trace.column("s_value")
    mode = trace.column("mode")
    n = s_val.size
    mask = np.zeros(n, dtype=bool)
    prod = s_val[:-1] * s_val[1:]
    flips = np.where((prod < 0.0) | (s_val[:-1] == 0.0) & (s_val[1:] != 0.0))[0]
    switches = np.where(mode[:-1] != mode[1:])[0]
    for k in np.concatenate([flips, switches]):
        mask[max(k - pad + 1, 0):k + pad + 1] = True
    mask[:pad] = True
    mask[-pad - 1:] = True
    return mask


def _measured_slide_rate(trace: Trace) -> np.ndarray:
    """Central-difference drift of the nearest boundary point, in arc units:
    metric * d(s_star)/dt with the parameter unwrapped across the seam.
    Edges are nan.
    """
    s = trace.column("s_star")
    metric = trace.column("metric")
    dt = trace.fnum("dt")
    out = np.full(s.size, np.nan)
    raw = s[2:] - s[:-2]
    raw = raw - np.round(raw)
    out[1:-1] = metric[1:-1] * raw / (2.0 * dt)
    return out


def check_velocity_decomposition(trace: Trace) -> IdentityCheck:
    """Residual of v_vec = xi*T + V - d_dot*N with xi reconstructed from the
    measured boundary drift (xi = s_rate + d*mu).
    """
    v = trace.column("v")
    theta = trace.column("theta")
    d = trace.column("d")
    d_dot = trace.column("d_dot")
    mu = trace.column("mu")
    tx, ty = trace.column("tx"), trace.column("ty")
    nx, ny = trace.column("nx"), trace.column("ny")
    v_n, v_t = trace.column("v_n"), trace.column("v_t")
    s_rate = _measured_slide_rate(trace)
    xi_m = s_rate + d * mu
    rhs_x = (xi_m + v_t) * tx + (v_n - d_dot) * nx
    rhs_y = (xi_m + v_t) * ty + (v_n - d_dot) * ny
    res = np.hypot(v * np.cos(theta) - rhs_x, v * np.sin(theta) - rhs_y)
    return _summarize("velocity_decomposition", res, exclusion_mask(trace),
                      TOL_VELOCITY, relative=False)


def check_distance_accel(trace: Trace) -> IdentityCheck:
    """Residual of the second central difference of d against the bypass
    acceleration law with the relay term, using the recorded analytic xi and
    the per-step rate of the held speed command.
    """
    d = trace.column("d")
    v = trace.column("v")
    u = trace.column("u")
    d_dot = trace.column("d_dot")
    xi = trace.column("xi")
    v_n, v_t = trace.column("v_n"), trace.column("v_t")
    a_n = trace.column("a_n")
    sigma = trace.column("sigma")
    kappa = trace.column("kappa")
    dt = trace.fnum("dt")
    n = d.size
    res = np.full(n, np.nan)
    dd = (d[2:] - 2.0 * d[1:-1] + d[:-2]) / (dt * dt)
    # The speed command is a zero-order hold, so the stencil at row k sees
    # exactly the rate jump (v[k]-v[k-1])/dt; a central difference would
    # average in the next jump and leave an O(dt) error proportional to the
    # curvature of the speed profile on its ramp.
    v_dot = (v[1:n - 1] - v[0:n - 2]) / dt
    k = slice(1, n - 1)
    denom = 1.0 + kappa[k] * d[k]
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (-u[k] * (xi[k] + v_t[k]) + a_n[k]
               + (2.0 * sigma[k] * xi[k] + kappa[k] * xi[k] ** 2
                  - d[k] * sigma[k] ** 2) / denom
               - (v_dot / v[k]) * (v_n[k] - d_dot[k]))
    res[k] = np.abs(dd - rhs)
    return _summarize("distance_accel", res, exclusion_mask(trace),
                      TOL_DISTANCE_ACCEL, relative=False)


def check_slide_rate(trace: Trace) -> IdentityCheck:
    """Measured nearest-parameter drift against the recorded analytic rate."""
    res = np.abs(_measured_slide_rate(trace) - trace.column("s_dot"))
    return _summarize("slide_rate", res, exclusion_mask(trace),
                      TOL_SLIDE_RATE, relative=False)


def check_speed_split(trace: Trace) -> IdentityCheck:
    """Per-row algebra: the tangential and normal splits of the commanded
    velocity must recompose to its squared magnitude. No stencil, so only
    the terminal sentinel row is skipped.
    """
    v = trace.column("v")
    d_dot = trace.column("d_dot")
    xi = trace.column("xi")
    v_n, v_t = trace.column("v_n"), trace.column("v_t")
    lhs = (xi + v_t) ** 2 + (v_n - d_dot) ** 2
    res = np.abs(lhs - v * v) / np.maximum(v * v, 1e-300)
    mask = np.zeros(v.size, dtype=bool)
    mask[-1] = True
    return _summarize("speed_split", res, mask, TOL_SPEED_SPLIT, relative=True)


def _summarize(name: str, res: np.ndarray, mask: np.ndarray, tol: float,
               relative: bool) -> IdentityCheck:
    eligible = np.isfinite(res)
    use = eligible & ~mask
    n_checked = int(use.sum())
    n_excluded = int((eligible & mask).sum())
    worst = float(res[use].max()) if n_checked else math.nan
    ok = n_checked > 0 and worst <= tol
    return IdentityCheck(name, worst, tol, relative, ok, n_checked, n_excluded)


def identity_checks(trace: Trace) -> Tuple[IdentityCheck, ...]:
    return (check_velocity_decomposition(trace),
            check_distance_accel(trace),
            check_slide_rate(trace),
            check_speed_split(trace))


def _longest_avoidance(mode: np.ndarray) -> Tuple[int, int]:
    """(start, stop) inclusive rows of the longest contiguous avoidance
    stretch; (-1, -1) when none exists.
    """
    best = (-1, -1)
    best_len = 0
    i = 0
    n = mode.size
    while i < n:
        if mode[i] == 1.0:
            j = i
            while j + 1 < n and mode[j + 1] == 1.0:
                j += 1
            if j - i + 1 > best_len:
                best_len = j - i + 1
                best = (i, j)
            i = j + 1
        else:
            i += 1
    return best


def assess_engagement(trace: Trace) -> EngagementReport:
    """Engagement verdicts for the longest avoidance stretch of a trace.

    Capture is the first row where |S| stays within 3*K*dt for 20 steps,
    K being the largest surface rate |dS/dt| seen during the engagement.
    Convergence tolerances: |d - d0| <= max(0.02*d0, 2*K*dt) and
    |d_dot| <= 0.1*v_star at the engagement end.
    """
    mode = trace.column("mode")
    d = trace.column("d")
    d_dot = trace.column("d_dot")
    s_val = trace.column("s_value")
    s_dot = trace.column("s_dot")
    dt = trace.fnum("dt")
    d0 = trace.fnum("d0")
    d_safe = trace.fnum("d_safe")
    d_minus = trace.fnum("d_minus")
    d_plus = trace.fnum("d_plus")
    v_star = trace.fnum("gamma") * trace.fnum("delta")
    t = trace.column("t")

    finite_d = d[np.isfinite(d)]
    min_distance = float(finite_d.min()) if finite_d.size else math.nan

    start, stop = _longest_avoidance(mode)
    if start < 0:
        return EngagementReport(False, "no avoidance engagement in trace",
                                -1, -1, -1, math.nan, math.nan, math.nan,
                                False, False, False, False,
                                min_distance, math.nan, math.nan, math.nan)

    seg = s_val[start:stop + 1]
    step = np.abs(np.diff(seg))
    rate_bound = float(np.nanmax(step) / dt) if step.size else math.nan
    band = 3.0 * rate_bound * dt

    capture = -1
    run = 0
    for k in range(start, stop + 1):
        if np.isfinite(s_val[k]) and abs(s_val[k]) <= band:
            run += 1
            if run >= CAPTURE_RUN:
                capture = k - CAPTURE_RUN + 1
                break
        else:
            run = 0
    if capture < 0:
        return EngagementReport(False, "trace ends before surface capture",
                                start, stop, -1, math.nan, rate_bound,
                                math.nan, False, False, False, False,
                                min_distance, math.nan, math.nan, math.nan)

    chatter = float(np.nanmax(np.abs(s_val[capture:stop + 1])))
    safety_ok = min_distance >= d_safe
    d_cap = d[capture:stop + 1]
    corridor_ok = bool((d_cap >= d_minus).all() and (d_cap <= d_plus).all())
    d_err_end = abs(float(d[stop]) - d0)
    d_rate_end = abs(float(d_dot[stop]))
    convergence_ok = (d_err_end <= max(0.02 * d0, 2.0 * rate_bound * dt)
                      and d_rate_end <= 0.1 * v_star)
    tail = s_dot[(capture + stop + 1) // 2:stop + 1]
    tail = tail[np.isfinite(tail)]
    overtaking_ok = bool(tail.size and ((tail > 0).all() or (tail < 0).all()))
    excluded_fraction = float(exclusion_mask(trace)[capture:stop + 1].mean())
    return EngagementReport(True, "", start, stop, capture,
                            float(t[capture]), rate_bound, chatter,
                            safety_ok, corridor_ok, convergence_ok,
                            overtaking_ok, min_distance, d_err_end,
                            d_rate_end, excluded_fraction)


def convergence_rate(trace: Trace,
                     report: Optional[EngagementReport] = None) -> RateFit:
    """Exponential decay rate of |d - d0| on the unsaturated sliding segment.

    Fits log|d - d0| by least squares over the post-capture rows where the
    offset lies inside the linear relay zone (|d - d0| <= 0.9*delta) yet
    above the chatter floor (10x the observed chatter), stopping at the
    first row that falls below the floor. Raises ValueError when the trace
    is inconclusive or the window is degenerate.
    """
    if report is None:
        report = assess_engagement(trace)
    if not report.conclusive:
        raise ValueError(f"no rate fit: {report.reason}")
    d = trace.column("d")
    t = trace.column("t")
    d0 = trace.fnum("d0")
    delta = trace.fnum("delta")
    y = np.abs(d[report.capture:report.stop + 1] - d0)
    tt = t[report.capture:report.stop + 1]
    floor = 10.0 * report.chatter
    below = np.where(y < floor)[0]
    stop = below[0] if below.size else y.size
    use = np.where(y[:stop] <= 0.9 * delta)[0]
    if use.size < 10:
        raise ValueError("no rate fit: fewer than 10 samples between the "
                         "chatter floor and the linear zone edge")
    ty, ly = tt[use], np.log(y[use])
    slope = np.polyfit(ty, ly, 1)[0]
    return RateFit(-float(slope), int(use.size),
                   (float(ty[0]), float(ty[-1])))


def format_report(checks: Tuple[IdentityCheck, ...],
                  report: EngagementReport) -> str:
    lines = []
    for c in checks:
        unit = "rel" if c.relative else "abs"
        lines.append(f"  identity {c.name:24s} max {c.max_residual:.3e} "
                     f"<= {c.tolerance:.0e} {unit}  "
                     f"({c.n_checked} rows, {c.n_excluded} excluded)  "
                     f"{'PASS' if c.ok else 'FAIL'}")
    if not report.conclusive:
        lines.append(f"  engagement: inconclusive ({report.reason})")
    else:
        lines.append(f"  capture t = {report.capture_time:.3f}  "
                     f"chatter {report.chatter:.2e}  K {report.rate_bound:.3f}  "
                     f"switch-window share {report.excluded_fraction:.3f}")
        lines.append(f"  safety      min d = {report.min_distance:.6f}  "
                     f"{'PASS' if report.safety_ok else 'FAIL'}")
        lines.append(f"  corridor    post-capture  "
                     f"{'PASS' if report.corridor_ok else 'FAIL'}")
        lines.append(f"  convergence |d-d0| = {report.d_err_end:.2e}, "
                     f"|d_dot| = {report.d_rate_end:.2e}  "
                     f"{'PASS' if report.convergence_ok else 'FAIL'}")
        lines.append(f"  overtaking  single-signed drift  "
                     f"{'PASS' if report.overtaking_ok else 'FAIL'}")
    return "\n".join(lines)
