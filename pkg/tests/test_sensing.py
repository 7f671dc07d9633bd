import math
import warnings

import numpy as np
import pytest

from slidenav import kernels
from slidenav.obstacle import (Circle, Ellipse, ObstacleModel, PeriodicSpline,
                               Rotate, Scale, TimeProfile, Translate)
from slidenav.sensing import (AmbiguousNearestWarning, InsideObstacleError,
                              at_target, distance_rate, nearest_point,
                              relative_motion, sense, target_heading)

ELLIPSE = ObstacleModel(Ellipse(0.3, -0.2, 1.5, 0.7))


def brute_nearest(obstacle, r, t, n=1_000_000):
    """Dense grid argmin as an independent oracle for the scan+Newton search."""
    pack = obstacle.kernel_pack()
    best_d, best_s = np.inf, 0.0
    for lo in range(0, n, 200_000):
        block = np.arange(lo, min(lo + 200_000, n)) / n
        p = kernels.eval_positions(pack, block, t)
        d = np.hypot(p[:, 0] - r[0], p[:, 1] - r[1])
        k = int(d.argmin())
        if d[k] < best_d:
            best_d, best_s = float(d[k]), float(block[k])
    return best_s, best_d


def test_nearest_matches_brute_force_on_ellipse():
    rng = np.random.default_rng(3)
    for _ in range(6):
        ang = rng.uniform(0.0, 2.0 * math.pi)
        rad = rng.uniform(2.0, 4.0)
        r = (0.3 + rad * math.cos(ang), -0.2 + rad * math.sin(ang))
        got = nearest_point(ELLIPSE, r, 0.0)
        ref_s, ref_d = brute_nearest(ELLIPSE, r, 0.0)
        assert got.distance == pytest.approx(ref_d, abs=1e-9)
        gap = abs(got.s - ref_s)
        assert min(gap, 1.0 - gap) < 2e-6  # brute grid resolution


def test_newton_residual_is_stationary():
    # converged means |<r-p, p_s>| / |p_s| <= tol * (1 + d)
    rng = np.random.default_rng(5)
    pack = ELLIPSE.kernel_pack()
    checked = 0
    for _ in range(60):
        r = rng.uniform(-4.0, 4.0, 2)
        if math.hypot(r[0] - 0.3, r[1] + 0.2) < 1.8:
            continue
        out = kernels.nearest_fields(pack, r[0], r[1], 0.0, 720, 20, 1e-12)
        s, dist, converged = out[0], out[1], out[2]
        assert converged == 1
        p, ps, *_ = kernels.eval_bundle(pack, np.array([s]), 0.0)
        resid = abs((r[0] - p[0, 0]) * ps[0, 0] + (r[1] - p[0, 1]) * ps[0, 1])
        speed = math.hypot(ps[0, 0], ps[0, 1])
        assert resid <= 2e-12 * (1.0 + dist) * speed
        checked += 1
    assert checked >= 40


def peanut_model():
    # r(phi) = sqrt(1 + 0.8 cos 2phi): lobes on the x axis, waist on the y axis
    phi = 2.0 * math.pi * np.arange(128) / 128
    rad = np.sqrt(1.0 + 0.8 * np.cos(2.0 * phi))
    return ObstacleModel(PeriodicSpline(
        np.stack([rad * np.cos(phi), rad * np.sin(phi)], axis=1)))


def test_peanut_tie_warns_ambiguous():
    # seen from high above the waist, the two flanks tie for nearest;
    # the waist point between them is a local maximum of distance
    peanut = peanut_model()
    with pytest.warns(AmbiguousNearestWarning):
        got = nearest_point(peanut, (0.0, 3.0), 0.0)
    assert got.ambiguous
    assert got.s < got.s_second
    assert got.s + got.s_second == pytest.approx(0.5, abs=1e-6)  # mirror pair
    assert 0.05 < got.s_second - got.s < 0.45
    assert got.distance < 3.0 - math.sqrt(0.2)  # beats the waist point


def test_inside_raises():
    with pytest.raises(InsideObstacleError):
        nearest_point(ELLIPSE, (0.3, -0.2), 0.0)
    with pytest.raises(InsideObstacleError):
        nearest_point(ELLIPSE, (1.5, -0.3), 0.0)  # off center, still interior


def test_distance_rate_matches_fd():
    moving = ObstacleModel(Circle(0.0, 0.0, 1.0), [
        Scale(TimeProfile(1.0, 0.0, 0.05, 0.9, 0.0),
              TimeProfile(1.0, 0.0, 0.05, 0.9, 0.0)),
        Translate(TimeProfile(0.0, 0.03, 0.1, 0.5, 0.2), TimeProfile()),
    ])
    rng = np.random.default_rng(11)
    h = 1e-5
    for _ in range(8):
        ang = rng.uniform(0.0, 2.0 * math.pi)
        rad = rng.uniform(1.8, 3.0)
        t = rng.uniform(0.5, 8.0)
        r = np.array([rad * math.cos(ang), rad * math.sin(ang)])
        r_dot = rng.uniform(-0.4, 0.4, 2)
        got = distance_rate(moving, r, r_dot, t)
        d_hi = nearest_point(moving, r + h * r_dot, t + h).distance
        d_lo = nearest_point(moving, r - h * r_dot, t - h).distance
        assert got == pytest.approx((d_hi - d_lo) / (2.0 * h), abs=1e-5)


def test_distance_rate_sign_convention():
    # robot at (2,0) backing straight away from a static unit disc: d grows
    disc = ObstacleModel(Circle(0.0, 0.0, 1.0))
    assert distance_rate(disc, (2.0, 0.0), (0.3, 0.0), 0.0) == pytest.approx(0.3)
    assert distance_rate(disc, (2.0, 0.0), (-0.3, 0.0), 0.0) == pytest.approx(-0.3)
    # pure tangential motion leaves d unchanged to first order
    assert distance_rate(disc, (2.0, 0.0), (0.0, 0.5), 0.0) == pytest.approx(0.0)


def test_relative_motion_identities():
    # rigid rotation: riding along with the boundary material cancels xi
    spin = ObstacleModel(Circle(0.0, 0.0, 1.0),
                         [Rotate(TimeProfile(0.0, 0.5, 0.0, 0.0, 0.0))])
    r = (2.0, 0.0)
    near = nearest_point(spin, r, 1.3)
    ff = spin.frame_fields(near.s, 1.3)
    d = near.distance
    bk = relative_motion(spin, near.s, 1.3, r, ff.tangent * ff.v_t)
    assert bk.xi == pytest.approx(0.0, abs=1e-12)
    assert bk.s_dot == pytest.approx(-d * ff.sigma / (1.0 + ff.kappa * d),
                                     abs=1e-12)
    bk0 = relative_motion(spin, near.s, 1.3, r, (0.0, 0.0))
    assert bk0.xi == pytest.approx(-ff.v_t, abs=1e-12)
    assert bk0.mu == pytest.approx(ff.sigma + ff.kappa * bk0.s_dot, abs=1e-15)


def test_relative_motion_rejects_focal_distance():
    # concave arc with 1 + kappa*d <= 0: nearest point not locally unique
    peanut = peanut_model()
    ff = peanut.frame_fields(0.25, 0.0)  # top of the waist
    assert ff.kappa < -1.0  # strongly concave
    bad_r = ff.point - (1.5 / abs(ff.kappa)) * ff.normal  # past the focal point
    with pytest.raises(ValueError, match="not locally unique"):
        relative_motion(peanut, 0.25, 0.0, bad_r, (0.0, 0.0))


def test_sense_blind_outside_range():
    out = sense(ELLIPSE, (10.0, 0.0), 0.0, 0.2, (12.0, 0.0), 0.0, 2.0)
    assert not out.reading.in_range
    assert math.isnan(out.reading.d) and math.isnan(out.reading.d_dot)
    assert math.isfinite(out.distance)       # ground truth keeps flowing
    assert out.distance > 2.0
    near = sense(ELLIPSE, (2.5, -0.2), 0.0, 0.2, (12.0, 0.0), 0.0, 2.0)
    assert near.reading.in_range
    assert near.reading.d == pytest.approx(near.distance)
    assert near.reading.d_dot == pytest.approx(near.distance_rate)


def test_target_heading_unit():
    h = target_heading((1.0, 2.0), (4.0, 6.0))
    assert np.hypot(*h) == pytest.approx(1.0)
    assert h == pytest.approx([0.6, 0.8])
    with pytest.raises(ValueError):
        target_heading((1.0, 2.0), (1.0, 2.0))


def test_at_target_radius():
    assert at_target((1.0, 1.0), (1.03, 1.04), 0.051)
    assert not at_target((1.0, 1.0), (1.03, 1.04), 0.049)


def test_no_spurious_ambiguity_on_ellipse():
    rng = np.random.default_rng(7)
    with warnings.catch_warnings():
        warnings.simplefilter("error", AmbiguousNearestWarning)
        for _ in range(30):
            ang = rng.uniform(0.0, 2.0 * math.pi)
            rad = rng.uniform(2.2, 5.0)
            r = (0.3 + rad * math.cos(ang), -0.2 + rad * math.sin(ang))
            nearest_point(ELLIPSE, r, 0.0)
