"""Scenario files: line-oriented key=value sections describing one run.

Sections: [robot], [controller], [obstacle], [start], [target], [run].
Obstacle lines: one `curve = <kind> <numbers...>` plus zero or more
`primitive = <kind> key=(offset,slope,amp,omega,phase) ...` lines applied in
file order. serialize() emits a canonical form (fixed key order, shortest
round-trip float repr) so serialize -> parse is the identity.
"""

import hashlib
from typing import NamedTuple

import numpy as np

from .controller import ControllerParams, NORMAL, REVERSED
from .obstacle import (Circle, Ellipse, ObstacleModel, PeriodicSpline,
                       RoundedPolygon, Rotate, Scale, Shear, TimeProfile,
                       Translate, Warp)
from .robot import RobotParams, RobotState
from .sensing import InsideObstacleError, nearest_point

MAX_DT = 0.01


class ScenarioError(ValueError):
    pass


class Scenario(NamedTuple):
    robot: RobotParams
    control: ControllerParams
    obstacle: ObstacleModel
    start: RobotState
    target: tuple[float, float]
    horizon: float
    dt: float

    def validate(self) -> None:
        """Raise ScenarioError naming the violated invariant."""
        r = self.robot
        if not (r.half_axle > 0 and r.wheel_radius > 0 and r.wheel_rate_max > 0):
            raise ScenarioError("robot parameters must be positive")
        try:
            self.control.validate(r)
        except ValueError as e:
            raise ScenarioError(str(e)) from None
        if not (0.0 < self.dt <= MAX_DT):
            raise ScenarioError(f"dt must be in (0, {MAX_DT}], got {self.dt}")
        if not (self.horizon > self.dt):
            raise ScenarioError(f"horizon must exceed dt, got {self.horizon}")
        try:
            self.obstacle.validate(self.horizon)
        except ValueError as e:
            raise ScenarioError(f"obstacle invalid: {e}") from None
        try:
            near = nearest_point(self.obstacle, (self.start.x, self.start.y), 0.0)
        except InsideObstacleError as e:
            raise ScenarioError(f"start is inside the obstacle: {e}") from None
        if near.distance < self.control.d_safe:
            raise ScenarioError(
                f"start violates the safety margin: d={near.distance} < "
                f"d_safe={self.control.d_safe}")

    def mirror_y(self) -> "Scenario":
        """Reflect everything across the x-axis and flip the turn variant."""
        c = self.control._replace(
            sign_variant=REVERSED if self.control.sign_variant == NORMAL else NORMAL)
        return Scenario(self.robot, c, self.obstacle.mirror_y(),
                        RobotState(self.start.x, -self.start.y, -self.start.theta),
                        (self.target[0], -self.target[1]), self.horizon, self.dt)

    def content_hash(self) -> str:
        return hashlib.sha256(serialize(self).encode()).hexdigest()[:16]


def _fmt(x: float) -> str:
    return repr(float(x))


def _profile_str(p: TimeProfile) -> str:
    return "(" + ",".join(_fmt(v) for v in p.as_row()) + ")"


def _curve_str(curve) -> str:
    if isinstance(curve, Circle):
        return " ".join(["circle", _fmt(curve.center_x), _fmt(curve.center_y),
                         _fmt(curve.radius)])
    if isinstance(curve, Ellipse):
        return " ".join(["ellipse", _fmt(curve.center_x), _fmt(curve.center_y),
                         _fmt(curve.semi_x), _fmt(curve.semi_y)])
    if isinstance(curve, PeriodicSpline):
        return "spline " + " ".join(_fmt(v) for v in curve.points.ravel())
    if isinstance(curve, RoundedPolygon):
        return ("rounded_polygon " + _fmt(curve.corner_radius) + " "
                + " ".join(_fmt(v) for v in curve.vertices.ravel()))
    raise ScenarioError(f"unknown curve type {type(curve).__name__}")


def _prim_str(p) -> str:
    if isinstance(p, Translate):
        return f"translate x={_profile_str(p.x)} y={_profile_str(p.y)}"
    if isinstance(p, Rotate):
        return (f"rotate angle={_profile_str(p.angle)} cx={_profile_str(p.center_x)} "
                f"cy={_profile_str(p.center_y)}")
    if isinstance(p, Scale):
        return (f"scale fx={_profile_str(p.factor_x)} fy={_profile_str(p.factor_y)} "
                f"cx={_profile_str(p.center_x)} cy={_profile_str(p.center_y)}")
    if isinstance(p, Shear):
        return (f"shear kx={_profile_str(p.coupling_x)} ky={_profile_str(p.coupling_y)} "
                f"cx={_profile_str(p.center_x)} cy={_profile_str(p.center_y)}")
    if isinstance(p, Warp):
        return (f"warp amp={_profile_str(p.amplitude)} axis={p.axis} "
                f"freq={_fmt(p.frequency)} phase={_fmt(p.phase)}")
    raise ScenarioError(f"unknown primitive type {type(p).__name__}")


def serialize(sc: Scenario) -> str:
    r, c = sc.robot, sc.control
    lines = [
        "[robot]",
        f"half_axle = {_fmt(r.half_axle)}",
        f"wheel_radius = {_fmt(r.wheel_radius)}",
        f"wheel_rate_max = {_fmt(r.wheel_rate_max)}",
        "",
        "[controller]",
        f"gamma = {_fmt(c.gamma)}",
        f"delta = {_fmt(c.delta)}",
        f"d0 = {_fmt(c.d0)}",
        f"d_safe = {_fmt(c.d_safe)}",
        f"d_av = {_fmt(c.d_av)}",
        f"d_minus = {_fmt(c.d_minus)}",
        f"d_plus = {_fmt(c.d_plus)}",
        f"v0 = {_fmt(c.v0)}",
        f"v_cr = {_fmt(c.v_cr)}",
        f"d0_y = {_fmt(c.d0_y)}",
        f"d_cr = {_fmt(c.d_cr)}",
        f"sign_variant = {c.sign_variant}",
        f"theta_tol = {_fmt(c.theta_tol)}",
        f"r_reach = {_fmt(c.r_reach)}",
        f"sensor_range = {_fmt(c.sensor_range)}",
        f"epsilon_bl = {_fmt(c.epsilon_bl)}",
        "",
        "[obstacle]",
    ]
    if sc.obstacle.name:
        lines.append(f"name = {sc.obstacle.name}")
    lines.append(f"curve = {_curve_str(sc.obstacle.curve)}")
    for p in sc.obstacle.primitives:
        lines.append(f"primitive = {_prim_str(p)}")
    lines += [
        "",
        "[start]",
        f"x = {_fmt(sc.start.x)}",
        f"y = {_fmt(sc.start.y)}",
        f"theta = {_fmt(sc.start.theta)}",
        "",
        "[target]",
        f"x = {_fmt(sc.target[0])}",
        f"y = {_fmt(sc.target[1])}",
        "",
        "[run]",
        f"horizon = {_fmt(sc.horizon)}",
        f"dt = {_fmt(sc.dt)}",
        "",
    ]
    return "\n".join(lines)


def _parse_float(tok: str, where: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ScenarioError(f"bad number {tok!r} in {where}") from None


def _parse_profile(tok: str, where: str) -> TimeProfile:
    tok = tok.strip()
    if tok.startswith("(") and tok.endswith(")"):
        parts = tok[1:-1].split(",")
        if len(parts) != 5:
            raise ScenarioError(f"profile needs 5 numbers in {where}: {tok!r}")
        return TimeProfile(*(_parse_float(p, where) for p in parts))
    # bare number shorthand for a constant
    return TimeProfile.constant(_parse_float(tok, where))


def _parse_curve(rest: str, where: str):
    toks = rest.split()
    if not toks:
        raise ScenarioError(f"empty curve spec in {where}")
    kind, nums = toks[0], [_parse_float(t, where) for t in toks[1:]]
    if kind == "circle":
        if len(nums) != 3:
            raise ScenarioError(f"circle needs cx cy r in {where}")
        return Circle(*nums)
    if kind == "ellipse":
        if len(nums) != 4:
            raise ScenarioError(f"ellipse needs cx cy a b in {where}")
        return Ellipse(*nums)
    if kind == "spline":
        if len(nums) < 8 or len(nums) % 2:
            raise ScenarioError(f"spline needs >= 4 x,y pairs in {where}")
        return PeriodicSpline(np.array(nums).reshape(-1, 2))
    if kind == "rounded_polygon":
        if len(nums) < 7 or (len(nums) - 1) % 2:
            raise ScenarioError(f"rounded_polygon needs radius then >= 3 x,y pairs in {where}")
        return RoundedPolygon(np.array(nums[1:]).reshape(-1, 2), nums[0])
    raise ScenarioError(f"unknown curve kind {kind!r} in {where}")


def _parse_primitive(rest: str, where: str):
    toks = rest.split()
    if not toks:
        raise ScenarioError(f"empty primitive spec in {where}")
    kind = toks[0]
    kv = {}
    for tok in toks[1:]:
        if "=" not in tok:
            raise ScenarioError(f"expected key=value, got {tok!r} in {where}")
        k, v = tok.split("=", 1)
        kv[k] = v

    def prof(key, default=None):
        if key not in kv:
            if default is None:
                raise ScenarioError(f"primitive {kind!r} missing {key}= in {where}")
            return default
        return _parse_profile(kv.pop(key), where)

    zero = TimeProfile()
    if kind == "translate":
        out = Translate(prof("x"), prof("y"))
    elif kind == "rotate":
        out = Rotate(prof("angle"), prof("cx", zero), prof("cy", zero))
    elif kind == "scale":
        out = Scale(prof("fx"), prof("fy"), prof("cx", zero), prof("cy", zero))
    elif kind == "shear":
        out = Shear(prof("kx"), prof("ky"), prof("cx", zero), prof("cy", zero))
    elif kind == "warp":
        amp = prof("amp")
        axis = int(_parse_float(kv.pop("axis", "0"), where))
        freq = _parse_float(kv.pop("freq", "1"), where)
        phase = _parse_float(kv.pop("phase", "0"), where)
        out = Warp(amp, axis, freq, phase)
    else:
        raise ScenarioError(f"unknown primitive kind {kind!r} in {where}")
    if kv:
        raise ScenarioError(f"unknown keys {sorted(kv)} for primitive {kind!r} in {where}")
    return out


_SECTIONS = ("robot", "controller", "obstacle", "start", "target", "run")


def parse(text: str) -> Scenario:
    """Parse and validate a scenario document."""
    sections: dict[str, list[tuple[str, str, str]]] = {s: [] for s in _SECTIONS}
    current = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {ln}"
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise ScenarioError(f"unknown section [{name}] at {where}")
            current = name
            continue
        if current is None:
            raise ScenarioError(f"key outside any section at {where}")
        if "=" not in line:
            raise ScenarioError(f"expected key = value at {where}")
        k, v = line.split("=", 1)
        sections[current].append((k.strip(), v.strip(), where))

    def grab(section, multi_ok=()):
        out = {}
        for k, v, where in sections[section]:
            if k in multi_ok:
                out.setdefault(k, []).append((v, where))
            elif k in out:
                raise ScenarioError(f"duplicate key {k!r} in [{section}] at {where}")
            else:
                out[k] = (v, where)
        return out

    def need(d, section, key, conv=float):
        if key not in d:
            raise ScenarioError(f"missing key {key!r} in [{section}]")
        v, where = d.pop(key)
        if conv is float:
            return _parse_float(v, where)
        return v

    def opt(d, key, default, conv=float):
        if key not in d:
            return default
        v, where = d.pop(key)
        return _parse_float(v, where) if conv is float else v

    def check_empty(d, section):
        if d:
            raise ScenarioError(f"unknown keys {sorted(d)} in [{section}]")

    rd = grab("robot")
    robot = RobotParams(need(rd, "robot", "half_axle"),
                        need(rd, "robot", "wheel_radius"),
                        need(rd, "robot", "wheel_rate_max"))
    check_empty(rd, "robot")

    cd = grab("controller")
    control = ControllerParams(
        gamma=need(cd, "controller", "gamma"),
        delta=need(cd, "controller", "delta"),
        d0=need(cd, "controller", "d0"),
        d_safe=need(cd, "controller", "d_safe"),
        d_av=need(cd, "controller", "d_av"),
        d_minus=need(cd, "controller", "d_minus"),
        d_plus=need(cd, "controller", "d_plus"),
        v0=need(cd, "controller", "v0"),
        v_cr=need(cd, "controller", "v_cr"),
        d0_y=need(cd, "controller", "d0_y"),
        d_cr=need(cd, "controller", "d_cr"),
        sign_variant=opt(cd, "sign_variant", NORMAL, conv=str),
        theta_tol=opt(cd, "theta_tol", 0.02),
        r_reach=opt(cd, "r_reach", 0.05),
        sensor_range=opt(cd, "sensor_range", -1.0),
        epsilon_bl=opt(cd, "epsilon_bl", 0.0),
    )
    check_empty(cd, "controller")

    od = grab("obstacle", multi_ok=("primitive",))
    name = opt(od, "name", "", conv=str)
    if "curve" not in od:
        raise ScenarioError("missing key 'curve' in [obstacle]")
    curve_v, curve_where = od.pop("curve")
    try:
        curve = _parse_curve(curve_v, curve_where)
    except ScenarioError:
        raise
    except ValueError as e:
        raise ScenarioError(f"bad curve at {curve_where}: {e}") from None
    prims = []
    for v, where in od.pop("primitive", []):
        prims.append(_parse_primitive(v, where))
    check_empty(od, "obstacle")
    try:
        obstacle = ObstacleModel(curve, prims, name)
    except ScenarioError:
        raise
    except ValueError as e:
        raise ScenarioError(f"bad obstacle at {curve_where}: {e}") from None

    sd = grab("start")
    start = RobotState(need(sd, "start", "x"), need(sd, "start", "y"),
                       need(sd, "start", "theta"))
    check_empty(sd, "start")

    td = grab("target")
    target = (need(td, "target", "x"), need(td, "target", "y"))
    check_empty(td, "target")

    gd = grab("run")
    horizon = need(gd, "run", "horizon")
    dt = need(gd, "run", "dt")
    check_empty(gd, "run")

    sc = Scenario(robot, control, obstacle, start, target, horizon, dt)
    sc.validate()
    return sc


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(sc))
