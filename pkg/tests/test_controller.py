import math

import numpy as np
import pytest

from slidenav.controller import (ControllerParams, Mode, NORMAL, REVERSED,
                                 avoidance_law, chi, heading_error,
                                 launch_turn, pursuit_law, relay,
                                 surface_value, switch_mode, upsilon,
                                 upsilon_rate, variant_sign)
from slidenav.robot import RobotParams
from slidenav.sensing import SensorReading

ROBOT = RobotParams(0.5, 0.1, 5.0)
PARAMS = ControllerParams(gamma=1.0, delta=0.02, d0=0.3, d_safe=0.1,
                          d_av=0.45, d_minus=0.2, d_plus=0.4, v0=0.2,
                          v_cr=0.4, d0_y=0.45, d_cr=0.8)


def reading(d, d_dot, heading=(1.0, 0.0), in_range=True):
    return SensorReading(d, d_dot, heading, in_range)


def test_chi_linear_and_saturated():
    assert chi(PARAMS, 0.01) == pytest.approx(0.01)
    assert chi(PARAMS, -0.015) == pytest.approx(-0.015)
    assert chi(PARAMS, 0.02) == pytest.approx(0.02)   # knot belongs to the line
    assert chi(PARAMS, 0.5) == pytest.approx(PARAMS.v_star)
    assert chi(PARAMS, -3.0) == pytest.approx(-PARAMS.v_star)
    assert PARAMS.v_star == pytest.approx(0.02)


def test_upsilon_plateaus_and_knots():
    assert upsilon(PARAMS, 0.1) == 0.2
    assert upsilon(PARAMS, 0.45) == 0.2
    assert upsilon(PARAMS, 0.8) == 0.4
    assert upsilon(PARAMS, 2.5) == 0.4
    mid = 0.5 * (0.45 + 0.8)
    assert upsilon(PARAMS, mid) == pytest.approx(0.3)  # smoothstep is odd about the center


def test_upsilon_c2_and_monotone():
    # C2: value, slope, curvature all continuous at both knots (FD estimate)
    h = 1e-6
    for knot in (PARAMS.d0_y, PARAMS.d_cr):
        for fd, tol in ((lambda f, x: (f(x + h) - f(x - h)) / (2 * h), 1e-8),
                        (lambda f, x: (f(x + h) - 2 * f(x) + f(x - h)) / h**2, 1e-2)):
            lo = fd(lambda d: upsilon(PARAMS, d), knot - 2 * h)
            hi = fd(lambda d: upsilon(PARAMS, d), knot + 2 * h)
            assert abs(hi - lo) < tol
    d = np.linspace(0.4, 0.9, 200)
    v = np.array([upsilon(PARAMS, x) for x in d])
    assert (np.diff(v) >= 0).all()


def test_upsilon_rate_matches_fd():
    h = 1e-7
    for d in np.linspace(0.46, 0.79, 23):
        fd = (upsilon(PARAMS, d + h) - upsilon(PARAMS, d - h)) / (2 * h)
        assert upsilon_rate(PARAMS, d) == pytest.approx(fd, abs=1e-6)
    assert upsilon_rate(PARAMS, 0.2) == 0.0
    assert upsilon_rate(PARAMS, 1.0) == 0.0


def test_relay_sign_convention():
    assert relay(PARAMS, 0.5) == 1.0
    assert relay(PARAMS, -1e-300) == -1.0
    assert relay(PARAMS, 0.0) == 0.0
    soft = PARAMS._replace(epsilon_bl=0.01)
    assert relay(soft, 0.005) == pytest.approx(0.5)
    assert relay(soft, -0.5) == -1.0


def test_surface_value():
    s = surface_value(PARAMS, 0.35, -0.01)
    assert s == pytest.approx(-0.01 + 0.02)  # chi saturates at v_star
    assert surface_value(PARAMS, 0.3, 0.0) == 0.0


def test_avoidance_law_budget_and_direction():
    r = reading(0.3, -0.05)  # S < 0: turn toward the boundary side
    out = avoidance_law(PARAMS, ROBOT, r)
    assert out.v == pytest.approx(0.2)
    assert abs(out.v) + ROBOT.half_axle * abs(out.u) == pytest.approx(ROBOT.speed_cap)
    assert out.u == pytest.approx(-(0.5 - 0.2) / 0.5)
    out_pos = avoidance_law(PARAMS, ROBOT, reading(0.3, 0.05))
    assert out_pos.u == pytest.approx(+(0.5 - 0.2) / 0.5)
    rev = PARAMS._replace(sign_variant=REVERSED)
    assert avoidance_law(rev, ROBOT, r).u == pytest.approx(+(0.5 - 0.2) / 0.5)
    # relay zero: straight run, budget not saturated
    assert avoidance_law(PARAMS, ROBOT, reading(0.3, 0.0)).u == 0.0


def test_pursuit_law():
    assert pursuit_law(PARAMS, ROBOT, reading(0.5, 0.0)).v == pytest.approx(
        upsilon(PARAMS, 0.5))
    assert pursuit_law(PARAMS, ROBOT, reading(0.5, 0.0)).u == 0.0
    blind = SensorReading(math.nan, math.nan, (1.0, 0.0), False)
    assert pursuit_law(PARAMS, ROBOT, blind).v == PARAMS.v_cr


def test_launch_turn():
    out = launch_turn(PARAMS, ROBOT)
    assert out.v == PARAMS.v0
    assert out.u == pytest.approx(-0.6)  # normal variant swings clockwise
    assert launch_turn(PARAMS._replace(sign_variant=REVERSED), ROBOT).u == \
        pytest.approx(0.6)
    assert variant_sign(PARAMS) == 1.0


def test_switch_predicates():
    # pursuit -> avoidance needs both d <= d_av and S <= 0
    assert switch_mode(PARAMS, Mode.PURSUIT, reading(0.44, -0.05), 0.0) == Mode.AVOIDANCE
    assert switch_mode(PARAMS, Mode.PURSUIT, reading(0.44, +0.20), 0.0) == Mode.PURSUIT
    assert switch_mode(PARAMS, Mode.PURSUIT, reading(0.46, -0.05), 0.0) == Mode.PURSUIT
    blind = SensorReading(math.nan, math.nan, (1.0, 0.0), False)
    assert switch_mode(PARAMS, Mode.PURSUIT, blind, 0.0) == Mode.PURSUIT
    # avoidance -> pursuit needs alignment and S >= 0
    head = (math.cos(0.005), math.sin(0.005))
    r_aligned = SensorReading(0.3, 0.0, head, True)
    assert switch_mode(PARAMS, Mode.AVOIDANCE, r_aligned, 0.0) == Mode.PURSUIT
    assert switch_mode(PARAMS, Mode.AVOIDANCE, r_aligned, 1.0) == Mode.AVOIDANCE
    r_falling = SensorReading(0.3, -0.05, head, True)
    assert switch_mode(PARAMS, Mode.AVOIDANCE, r_falling, 0.0) == Mode.AVOIDANCE
    assert switch_mode(PARAMS, Mode.AVOIDANCE, blind, 0.0) == Mode.AVOIDANCE


def test_heading_error_signed():
    assert heading_error(0.0, (1.0, 0.0)) == 0.0
    assert heading_error(0.0, (0.0, 1.0)) == pytest.approx(math.pi / 2)
    assert heading_error(math.pi / 2, (1.0, 0.0)) == pytest.approx(-math.pi / 2)


def test_validate_messages():
    with pytest.raises(ValueError, match="corridor ordering"):
        PARAMS._replace(d_safe=0.25).validate()
    with pytest.raises(ValueError, match="d_av"):
        PARAMS._replace(d_av=0.25).validate()
    with pytest.raises(ValueError, match="speed-blend knots"):
        PARAMS._replace(d_cr=0.44, sensor_range=2.0).validate()
    with pytest.raises(ValueError, match="v0"):
        PARAMS._replace(v0=0.5).validate()
    with pytest.raises(ValueError, match="wheel budget"):
        PARAMS._replace(v_cr=0.5).validate(ROBOT)
    with pytest.raises(ValueError, match="sensor range"):
        PARAMS._replace(sensor_range=0.7).validate()
    with pytest.raises(ValueError, match="sign_variant"):
        PARAMS._replace(sign_variant="sideways").validate()
    PARAMS.validate(ROBOT)
    assert PARAMS.range_limit == PARAMS.d_cr


def test_range_limit_override():
    assert PARAMS._replace(sensor_range=1.5).range_limit == 1.5
