import math

import numpy as np
import pytest

from slidenav import kernels
from slidenav.obstacle import (Circle, Ellipse, ObstacleModel, PeriodicSpline,
                               Rotate, RoundedPolygon, Scale, Shear,
                               TimeProfile, Translate, Warp)

H_T = 1e-4   # FD step in time
H_S = 1e-4   # FD step in curve parameter
REL = 1e-5   # scale-relative error budget for analytic vs FD

GENERIC = TimeProfile(0.3, 0.05, 0.2, 0.7, 0.4)
GENTLE = TimeProfile(1.0, 0.01, 0.05, 0.5, 1.1)


def fd_oracle_errors(obstacle, n_s=100, n_t=50, horizon=20.0):
    """Scale-relative max errors of the analytic derivative fields against
    central finite differences: velocity and acceleration against time
    differences of position, sigma against a time difference of the tangent
    bundle, kappa against parameter differences of position.
    """
    pack = obstacle.kernel_pack()
    s = (np.arange(n_s) + 0.5) / n_s
    worst = {"velocity": 0.0, "accel": 0.0, "sigma": 0.0, "kappa": 0.0}
    scale = {"velocity": 0.0, "accel": 0.0, "sigma": 0.0, "kappa": 0.0}
    for t in np.linspace(0.0, horizon, n_t):
        p, ps, pss, pt, ptt, pst = kernels.eval_bundle(pack, s, float(t))
        p_hi = kernels.eval_bundle(pack, s, float(t) + H_T)
        p_lo = kernels.eval_bundle(pack, s, float(t) - H_T)
        metric = np.hypot(ps[:, 0], ps[:, 1])
        nx, ny = -ps[:, 1] / metric, ps[:, 0] / metric

        vel_fd = (p_hi[0] - p_lo[0]) / (2.0 * H_T)
        acc_fd = (p_hi[0] - 2.0 * p + p_lo[0]) / H_T**2
        sig_fd = ((p_hi[1] - p_lo[1])[:, 0] / (2.0 * H_T) * nx
                  + (p_hi[1] - p_lo[1])[:, 1] / (2.0 * H_T) * ny) / metric
        sigma = (pst[:, 0] * nx + pst[:, 1] * ny) / metric

        s_hi = kernels.eval_bundle(pack, (s + H_S) % 1.0, float(t))[0]
        s_lo = kernels.eval_bundle(pack, (s - H_S) % 1.0, float(t))[0]
        ps_fd = (s_hi - s_lo) / (2.0 * H_S)
        pss_fd = (s_hi - 2.0 * p + s_lo) / H_S**2
        kap_fd = ((ps_fd[:, 0] * pss_fd[:, 1] - ps_fd[:, 1] * pss_fd[:, 0])
                  / np.hypot(ps_fd[:, 0], ps_fd[:, 1]) ** 3)
        kappa = (ps[:, 0] * pss[:, 1] - ps[:, 1] * pss[:, 0]) / metric**3

        for name, got, ref in (("velocity", pt, vel_fd),
                               ("accel", ptt, acc_fd),
                               ("sigma", sigma, sig_fd),
                               ("kappa", kappa, kap_fd)):
            worst[name] = max(worst[name], float(np.abs(got - ref).max()))
            scale[name] = max(scale[name], float(np.abs(ref).max()))
    return {k: worst[k] / max(scale[k], 1e-9) for k in worst}


PRIMITIVE_CASES = [
    ("translate", Translate(GENERIC, TimeProfile(-0.1, 0.02, 0.15, 0.9, 0.0))),
    ("rotate", Rotate(GENERIC, TimeProfile.constant(0.2), TimeProfile.constant(-0.1))),
    ("scale", Scale(GENTLE, GENTLE._replace(phase=0.3), TimeProfile.constant(0.1),
                    TimeProfile())),
    ("shear", Shear(TimeProfile(0.0, 0.01, 0.1, 0.8, 0.2), TimeProfile(),
                    TimeProfile(), TimeProfile.constant(0.05))),
    ("warp", Warp(TimeProfile(0.05, 0.0, 0.03, 0.6, 0.9), 0, 3.0, 0.5)),
]


@pytest.mark.parametrize("name,prim", PRIMITIVE_CASES, ids=[c[0] for c in PRIMITIVE_CASES])
def test_fd_oracles_per_primitive(name, prim):
    obstacle = ObstacleModel(Circle(0.2, -0.1, 1.0), [prim])
    errors = fd_oracle_errors(obstacle)
    for field, err in errors.items():
        assert err < REL, f"{name} {field}: {err:.2e}"


def test_fd_oracles_random_composition():
    rng = np.random.default_rng(42)
    prims = [
        Translate(TimeProfile(*rng.uniform(-0.2, 0.2, 5)),
                  TimeProfile(*rng.uniform(-0.2, 0.2, 5))),
        Rotate(TimeProfile(rng.uniform(-0.3, 0.3), 0.02,
                           rng.uniform(0.0, 0.2), 0.8, 0.1),
               TimeProfile.constant(0.2), TimeProfile.constant(0.0)),
        Scale(TimeProfile(1.0, 0.005, 0.04, 1.1, 0.0),
              TimeProfile(1.0, -0.003, 0.05, 0.6, 0.7),
              TimeProfile(), TimeProfile()),
    ]
    obstacle = ObstacleModel(Ellipse(0.0, 0.0, 1.2, 0.8), prims)
    errors = fd_oracle_errors(obstacle)
    for field, err in errors.items():
        assert err < REL, f"composition {field}: {err:.2e}"


def test_circle_analytic_fields():
    obstacle = ObstacleModel(Circle(0.0, 0.0, 2.0))
    f = obstacle.frame_fields(0.25, 0.0)
    assert f.point == pytest.approx((0.0, 2.0), abs=1e-12)
    assert f.kappa == pytest.approx(0.5, abs=1e-12)       # 1/r, convex positive
    assert f.metric == pytest.approx(4.0 * math.pi, rel=1e-12)
    assert np.dot(f.normal, f.point) == pytest.approx(-2.0, abs=1e-12)  # inward
    assert np.allclose([f.v_n, f.v_t, f.a_n, f.sigma], 0.0, atol=1e-15)


def test_translating_circle_fields():
    obstacle = ObstacleModel(Circle(0.0, 0.0, 1.0),
                             [Translate(TimeProfile(0.0, 0.3, 0.0, 0.0, 0.0),
                                        TimeProfile())])
    # nearest point on the +x side: inward normal is (-1, 0), so the +x
    # drift is seen as v_n = -0.3 there and +0.3 on the -x side
    f = obstacle.frame_fields(0.0, 1.0)
    assert f.velocity == pytest.approx((0.3, 0.0), abs=1e-12)
    assert f.v_n == pytest.approx(-0.3, abs=1e-12)
    f2 = obstacle.frame_fields(0.5, 1.0)
    assert f2.v_n == pytest.approx(0.3, abs=1e-12)
    assert f2.a_n == pytest.approx(0.0, abs=1e-12)
    assert obstacle.is_static() is False


def test_pulsating_circle_sigma():
    # uniform dilation rate c(t) = 1 + 0.1 t: boundary speed is radial,
    # tangential strain sigma = <p_st, N>/|p_s| = -rate (inward normal)
    obstacle = ObstacleModel(Circle(0.0, 0.0, 1.0),
                             [Scale(TimeProfile(1.0, 0.1, 0.0, 0.0, 0.0),
                                    TimeProfile(1.0, 0.1, 0.0, 0.0, 0.0),
                                    TimeProfile(), TimeProfile())])
    for s in (0.0, 0.2, 0.55):
        f = obstacle.frame_fields(s, 2.0)
        assert f.sigma == pytest.approx(0.0, abs=1e-12)
        assert f.v_t == pytest.approx(0.0, abs=1e-12)
        assert f.v_n == pytest.approx(-0.1, abs=1e-12)


def test_rotating_circle_tangential_speed():
    obstacle = ObstacleModel(Circle(0.0, 0.0, 1.0),
                             [Rotate(TimeProfile(0.0, 0.5, 0.0, 0.0, 0.0),
                                     TimeProfile(), TimeProfile())])
    f = obstacle.frame_fields(0.125, 3.0)
    assert f.v_t == pytest.approx(0.5, abs=1e-12)   # omega * r along tangent
    assert f.v_n == pytest.approx(0.0, abs=1e-12)
    assert f.sigma == pytest.approx(0.5, abs=1e-12)  # frame spin, not strain


def test_limacon_spline_concave_curvature():
    # r(phi) = 1 + 0.75 cos(phi) pinches at phi = pi: kappa there is -8
    phi = 2.0 * math.pi * np.arange(256) / 256
    r = 1.0 + 0.75 * np.cos(phi)
    pts = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    obstacle = ObstacleModel(PeriodicSpline(pts))
    f = obstacle.frame_fields(0.5, 0.0)
    assert f.point[0] == pytest.approx(-0.25, abs=1e-6)
    assert f.kappa == pytest.approx(-8.0, rel=5e-3)


def test_ellipse_curvature_extremes():
    a, b = 2.0, 1.0
    obstacle = ObstacleModel(Ellipse(0.0, 0.0, a, b))
    f_major = obstacle.frame_fields(0.0, 0.0)
    f_minor = obstacle.frame_fields(0.25, 0.0)
    assert f_major.kappa == pytest.approx(a / b**2, rel=1e-12)
    assert f_minor.kappa == pytest.approx(b / a**2, rel=1e-12)


def test_reparam_invariance_at_matched_points():
    # same geometric circle under three encodings: fields agree at the
    # same spatial point even though the parameterizations differ
    circle = ObstacleModel(Circle(0.0, 0.0, 1.0))
    ellipse = ObstacleModel(Ellipse(0.0, 0.0, 1.0, 1.0))
    rotated = ObstacleModel(Circle(0.0, 0.0, 1.0),
                            [Rotate(TimeProfile.constant(2.1),
                                    TimeProfile(), TimeProfile())])
    probes = [(1.3, 0.2), (-0.4, 1.1), (0.9, -0.9)]
    for ox, oy in probes:
        rows = []
        for obstacle in (circle, ellipse, rotated):
            out = kernels.nearest_fields(obstacle.kernel_pack(), ox, oy, 0.0,
                                         720, 20, 1e-12)
            # dist, point, kappa; parameterization-dependent slots skipped
            rows.append((out[1], out[5], out[6], out[11]))
        for other in rows[1:]:
            assert rows[0] == pytest.approx(other, abs=2e-9)


def test_mirror_polyline_and_scalars():
    prims = [Scale(GENTLE, GENTLE, TimeProfile(), TimeProfile()),
             Rotate(TimeProfile(0.1, 0.02, 0.0, 0.0, 0.0),
                    TimeProfile.constant(0.3), TimeProfile.constant(-0.2)),
             Translate(TimeProfile(0.0, 0.03, 0.1, 0.5, 0.2),
                       TimeProfile(0.0, -0.01, 0.2, 0.4, 1.0)),
             Warp(TimeProfile(0.04, 0.0, 0.02, 0.7, 0.1), 1, 2.0, 0.3)]
    obstacle = ObstacleModel(Ellipse(0.1, -0.2, 1.1, 0.8), prims)
    mirrored = obstacle.mirror_y()
    for t in (0.0, 2.7):
        a = obstacle.offset_polyline(0.15, t, n=512)
        b = mirrored.offset_polyline(0.15, t, n=512)
        flipped = np.stack([a[:, 0], -a[:, 1]], axis=1)
        # same closed curve, orientation-independent comparison
        order = np.lexsort((flipped[:, 1], flipped[:, 0]))
        order_b = np.lexsort((b[:, 1], b[:, 0]))
        assert np.allclose(flipped[order], b[order_b], atol=1e-6)
    # scalar fields at mirrored queries: d, kappa even; v_t, sigma odd
    for (qx, qy) in ((1.8, 0.4), (-0.9, -1.3)):
        fa = kernels.nearest_fields(obstacle.kernel_pack(), qx, qy, 1.5,
                                    720, 20, 1e-12)
        fb = kernels.nearest_fields(mirrored.kernel_pack(), qx, -qy, 1.5,
                                    720, 20, 1e-12)
        assert fa[1] == pytest.approx(fb[1], abs=1e-9)      # distance
        assert fa[11] == pytest.approx(fb[11], abs=1e-8)    # kappa
        assert fa[17] == pytest.approx(fb[17], abs=1e-9)    # v_n
        assert fa[18] == pytest.approx(-fb[18], abs=1e-9)   # v_t flips
        assert fa[19] == pytest.approx(fb[19], abs=1e-8)    # a_n
        assert fa[20] == pytest.approx(-fb[20], abs=1e-8)   # sigma flips


def test_time_profile_evaluation():
    p = TimeProfile(1.0, 0.5, 2.0, 3.0, 0.25)
    t = 1.7
    assert p.value(t) == pytest.approx(1.0 + 0.5 * t + 2.0 * math.sin(3.0 * t + 0.25))
    assert p.rate(t) == pytest.approx(0.5 + 6.0 * math.cos(3.0 * t + 0.25))
    assert p.accel(t) == pytest.approx(-18.0 * math.sin(3.0 * t + 0.25))
    assert TimeProfile.constant(2.0).value(9.9) == 2.0
    assert TimeProfile.constant(2.0).rate(9.9) == 0.0


def test_is_static():
    assert ObstacleModel(Circle(0, 0, 1)).is_static()
    assert ObstacleModel(Circle(0, 0, 1), [
        Translate(TimeProfile.constant(0.5), TimeProfile())]).is_static()
    assert not ObstacleModel(Circle(0, 0, 1), [
        Translate(TimeProfile(0.0, 0.1, 0.0, 0.0, 0.0), TimeProfile())]).is_static()
    assert not ObstacleModel(Circle(0, 0, 1), [
        Scale(TimeProfile(1.0, 0.0, 0.1, 2.0, 0.0),
              TimeProfile.constant(1.0), TimeProfile(), TimeProfile())]).is_static()


def test_validation_rejects_bad_shapes():
    cw = np.array([[1.0, 0.0], [0.0, -1.0], [-1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        ObstacleModel(PeriodicSpline(cw)).validate(1.0)
    with pytest.raises(ValueError):
        ObstacleModel(Circle(0.0, 0.0, -1.0)).validate(1.0)
    # collapse to a point partway through the horizon
    shrink = Scale(TimeProfile(1.0, -0.5, 0.0, 0.0, 0.0),
                   TimeProfile(1.0, -0.5, 0.0, 0.0, 0.0),
                   TimeProfile(), TimeProfile())
    with pytest.raises(ValueError):
        ObstacleModel(Circle(0.0, 0.0, 1.0), [shrink]).validate(5.0)
    ObstacleModel(Circle(0.0, 0.0, 1.0), [shrink]).validate(1.0)


def test_validation_rejects_self_crossing_loop():
    # limacon with an inner loop: positive total signed area, so the winding
    # check passes and only the crossing test can catch it
    phi = 2.0 * np.pi * np.arange(64) / 64
    rad = 0.5 + np.cos(phi)
    pts = np.stack([rad * np.cos(phi), rad * np.sin(phi)], axis=1)
    with pytest.raises(ValueError, match="self-intersects"):
        ObstacleModel(PeriodicSpline(pts)).validate(1.0)

    # convex rounded triangle with a long thin nose stays simple
    tri = RoundedPolygon(np.array([[1.5, 0.0], [-0.75, 1.3], [-0.75, -1.3]]),
                         0.3)
    ObstacleModel(tri).validate(60.0)


def test_rounded_polygon_fields():
    tri = RoundedPolygon(np.array([[1.5, 0.0], [-1.0, 1.2], [-1.0, -1.2]]), 0.3)
    obstacle = ObstacleModel(tri)
    obstacle.validate(1.0)
    s = np.linspace(0.0, 1.0, 400, endpoint=False)
    grid = obstacle.field_grid(s, [0.0])
    assert grid.kappa.min() >= -1e-9          # convex everywhere
    assert grid.kappa.max() == pytest.approx(1.0 / 0.3, rel=1e-6)
