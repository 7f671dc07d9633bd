"""Vectorized numpy backend for the hot kernels.

Reference implementation: every function here defines the semantics the numba
backend must reproduce (tested to 1e-13 relative agreement).

Boundary encoding ("pack"):
    (curve_kind, curve_data, sp_ts, sp_cx, sp_cy, prim_kinds, prim_params)

curve_data by kind:
    circle        [cx, cy, r]
    ellipse       [cx, cy, a, b]
    spline        []              (sp_ts knots, sp_cx/sp_cy (4,m) cubic coefs)
    rounded poly  [Ltot, n_pieces, then 10 floats per piece:
                   type(0 line,1 arc), s0, s1, g0..g6]
                   line: g0,g1 start point, g2,g3 unit direction
                   arc:  g0,g1 center, g2 radius, g3 start angle, g4 sweep

prim_params rows are 24 wide; each scalar parameter is a 5-float time profile
(offset, slope, amp, omega, phase) -> value = offset + slope*t + amp*sin(omega*t+phase).
    translate  cols 0-4 px, 5-9 py
    rotate     cols 0-4 angle, 5-9 cx, 10-14 cy
    scale      cols 0-4 ax, 5-9 ay, 10-14 cx, 15-19 cy
    shear      cols 0-4 kx, 5-9 ky, 10-14 cx, 15-19 cy
    warp       cols 0-4 amplitude, col 5 axis (0: y+=a*sin(w*x+ph)), col 6 w, col 7 ph
"""

import math

import numpy as np


def _profile(row, off, t):
    """Value and first two time derivatives of one parameter profile."""
    offset, slope, amp, om, ph = row[off:off + 5]
    arg = om * t + ph
    s = math.sin(arg)
    c = math.cos(arg)
    val = offset + slope * t + amp * s
    dval = slope + amp * om * c
    ddval = -amp * om * om * s
    return val, dval, ddval


def _curve_eval(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, s):
    """Reference boundary point and its first two s-derivatives.

    s is a 1-D array, wrapped into [0,1). Returns six 1-D arrays
    (x, y, xs, ys, xss, yss).
    """
    s = np.asarray(s, dtype=np.float64) % 1.0
    if curve_kind == 0:  # circle
        cx, cy, r = curve_data[0], curve_data[1], curve_data[2]
        a = 2.0 * np.pi * s
        ca, sa = np.cos(a), np.sin(a)
        w = 2.0 * np.pi
        return (cx + r * ca, cy + r * sa,
                -w * r * sa, w * r * ca,
                -w * w * r * ca, -w * w * r * sa)
    if curve_kind == 1:  # ellipse
        cx, cy, ea, eb = curve_data[0], curve_data[1], curve_data[2], curve_data[3]
        a = 2.0 * np.pi * s
        ca, sa = np.cos(a), np.sin(a)
        w = 2.0 * np.pi
        return (cx + ea * ca, cy + eb * sa,
                -w * ea * sa, w * eb * ca,
                -w * w * ea * ca, -w * w * eb * sa)
    if curve_kind == 2:  # periodic cubic spline, coefs in scipy PPoly layout
        idx = np.clip(np.searchsorted(sp_ts, s, side="right") - 1, 0, sp_ts.size - 2)
        u = s - sp_ts[idx]
        c0x, c1x, c2x, c3x = sp_cx[0, idx], sp_cx[1, idx], sp_cx[2, idx], sp_cx[3, idx]
        c0y, c1y, c2y, c3y = sp_cy[0, idx], sp_cy[1, idx], sp_cy[2, idx], sp_cy[3, idx]
        x = ((c0x * u + c1x) * u + c2x) * u + c3x
        y = ((c0y * u + c1y) * u + c2y) * u + c3y
        xs = (3.0 * c0x * u + 2.0 * c1x) * u + c2x
        ys = (3.0 * c0y * u + 2.0 * c1y) * u + c2y
        xss = 6.0 * c0x * u + 2.0 * c1x
        yss = 6.0 * c0y * u + 2.0 * c1y
        return x, y, xs, ys, xss, yss
    # rounded polygon: piecewise lines and arcs, constant-speed parameter
    ltot = curve_data[0]
    n_pieces = int(curve_data[1])
    starts = curve_data[2 + 10 * np.arange(n_pieces) + 1]
    idx = np.clip(np.searchsorted(starts, s, side="right") - 1, 0, n_pieces - 1)
    x = np.empty_like(s); y = np.empty_like(s)
    xs = np.empty_like(s); ys = np.empty_like(s)
    xss = np.empty_like(s); yss = np.empty_like(s)
    for k in range(n_pieces):
        m = idx == k
        if not m.any():
            continue
        row = curve_data[2 + 10 * k: 2 + 10 * (k + 1)]
        ptype, s0, s1 = row[0], row[1], row[2]
        frac = (s[m] - s0) / (s1 - s0)
        if ptype == 0.0:
            x0, y0, ux, uy = row[3], row[4], row[5], row[6]
            plen = (s1 - s0) * ltot
            x[m] = x0 + ux * plen * frac
            y[m] = y0 + uy * plen * frac
            xs[m] = ux * ltot
            ys[m] = uy * ltot
            xss[m] = 0.0
            yss[m] = 0.0
        else:
            acx, acy, r, a0, da = row[3], row[4], row[5], row[6], row[7]
            ang = a0 + da * frac
            ca, sa = np.cos(ang), np.sin(ang)
            rate = da / (s1 - s0)  # = +-Ltot/r
            x[m] = acx + r * ca
            y[m] = acy + r * sa
            xs[m] = -r * rate * sa
            ys[m] = r * rate * ca
            xss[m] = -r * rate * rate * ca
            yss[m] = -r * rate * rate * sa
    return x, y, xs, ys, xss, yss


def _affine_terms(kind, row, t):
    """M, M', M'' (2x2) and b, b', b'' (2) for the affine primitives."""
    if kind == 0:  # translate
        px, dpx, ddpx = _profile(row, 0, t)
        py, dpy, ddpy = _profile(row, 5, t)
        m = np.eye(2)
        z = np.zeros((2, 2))
        return m, z, z, np.array([px, py]), np.array([dpx, dpy]), np.array([ddpx, ddpy])
    if kind == 1:  # rotate about (possibly moving) center
        ang, dang, ddang = _profile(row, 0, t)
        cx, dcx, ddcx = _profile(row, 5, t)
        cy, dcy, ddcy = _profile(row, 10, t)
        ca, sa = math.cos(ang), math.sin(ang)
        m = np.array([[ca, -sa], [sa, ca]])
        jm = np.array([[-sa, -ca], [ca, -sa]])          # J @ R
        dm = dang * jm
        ddm = ddang * jm - dang * dang * m              # J^2 = -I
        c = np.array([cx, cy]); dc = np.array([dcx, dcy]); ddc = np.array([ddcx, ddcy])
        b = c - m @ c
        db = dc - dm @ c - m @ dc
        ddb = ddc - ddm @ c - 2.0 * (dm @ dc) - m @ ddc
        return m, dm, ddm, b, db, ddb
    if kind == 2:  # scale about center
        ax, dax, ddax = _profile(row, 0, t)
        ay, day, dday = _profile(row, 5, t)
        cx, dcx, ddcx = _profile(row, 10, t)
        cy, dcy, ddcy = _profile(row, 15, t)
        m = np.diag([ax, ay]); dm = np.diag([dax, day]); ddm = np.diag([ddax, dday])
    else:  # shear about center
        kx, dkx, ddkx = _profile(row, 0, t)
        ky, dky, ddky = _profile(row, 5, t)
        cx, dcx, ddcx = _profile(row, 10, t)
        cy, dcy, ddcy = _profile(row, 15, t)
        m = np.array([[1.0, kx], [ky, 1.0]])
        dm = np.array([[0.0, dkx], [dky, 0.0]])
        ddm = np.array([[0.0, ddkx], [ddky, 0.0]])
    c = np.array([cx, cy]); dc = np.array([dcx, dcy]); ddc = np.array([ddcx, ddcy])
    b = c - m @ c
    db = dc - dm @ c - m @ dc
    ddb = ddc - ddm @ c - 2.0 * (dm @ dc) - m @ ddc
    return m, dm, ddm, b, db, ddb


def _apply_chain_bundle(prim_kinds, prim_params, t, st):
    """Push the full derivative bundle through the primitive chain.

    st is a dict of 1-D arrays keyed x,y,xs,ys,xss,yss,xt,yt,xtt,ytt,xst,yst.
    """
    for k in range(prim_kinds.size):
        kind = int(prim_kinds[k])
        row = prim_params[k]
        if kind == 4:  # warp: q -> q + amp*sin(w*coord+ph) on the other coord
            amp, damp, ddamp = _profile(row, 0, t)
            axis = int(row[5]); w = row[6]; ph = row[7]
            if axis == 0:
                cx_, cxs, cxss = st["x"], st["xs"], st["xss"]
                cxt, cxtt, cxst = st["xt"], st["xtt"], st["xst"]
            else:
                cx_, cxs, cxss = st["y"], st["ys"], st["yss"]
                cxt, cxtt, cxst = st["yt"], st["ytt"], st["yst"]
            f = np.sin(w * cx_ + ph)
            fp = w * np.cos(w * cx_ + ph)
            fpp = -w * w * f
            add = amp * f
            add_s = amp * fp * cxs
            add_ss = amp * (fpp * cxs * cxs + fp * cxss)
            add_t = damp * f + amp * fp * cxt
            add_st = damp * fp * cxs + amp * (fpp * cxs * cxt + fp * cxst)
            add_tt = ddamp * f + 2.0 * damp * fp * cxt + amp * (fpp * cxt * cxt + fp * cxtt)
            tgt = "y" if axis == 0 else "x"
            st[tgt] = st[tgt] + add
            st[tgt + "s"] = st[tgt + "s"] + add_s
            st[tgt + "ss"] = st[tgt + "ss"] + add_ss
            st[tgt + "t"] = st[tgt + "t"] + add_t
            st[tgt + "st"] = st[tgt + "st"] + add_st
            st[tgt + "tt"] = st[tgt + "tt"] + add_tt
            continue
        m, dm, ddm, b, db, ddb = _affine_terms(kind, row, t)
        x, y = st["x"], st["y"]
        xt, yt = st["xt"], st["yt"]
        nx = m[0, 0] * x + m[0, 1] * y + b[0]
        ny = m[1, 0] * x + m[1, 1] * y + b[1]
        nxs = m[0, 0] * st["xs"] + m[0, 1] * st["ys"]
        nys = m[1, 0] * st["xs"] + m[1, 1] * st["ys"]
        nxss = m[0, 0] * st["xss"] + m[0, 1] * st["yss"]
        nyss = m[1, 0] * st["xss"] + m[1, 1] * st["yss"]
        nxt = dm[0, 0] * x + dm[0, 1] * y + db[0] + m[0, 0] * xt + m[0, 1] * yt
        nyt = dm[1, 0] * x + dm[1, 1] * y + db[1] + m[1, 0] * xt + m[1, 1] * yt
        nxst = dm[0, 0] * st["xs"] + dm[0, 1] * st["ys"] + m[0, 0] * st["xst"] + m[0, 1] * st["yst"]
        nyst = dm[1, 0] * st["xs"] + dm[1, 1] * st["ys"] + m[1, 0] * st["xst"] + m[1, 1] * st["yst"]
        nxtt = (ddm[0, 0] * x + ddm[0, 1] * y + ddb[0]
                + 2.0 * (dm[0, 0] * xt + dm[0, 1] * yt)
                + m[0, 0] * st["xtt"] + m[0, 1] * st["ytt"])
        nytt = (ddm[1, 0] * x + ddm[1, 1] * y + ddb[1]
                + 2.0 * (dm[1, 0] * xt + dm[1, 1] * yt)
                + m[1, 0] * st["xtt"] + m[1, 1] * st["ytt"])
        st.update(x=nx, y=ny, xs=nxs, ys=nys, xss=nxss, yss=nyss,
                  xt=nxt, yt=nyt, xst=nxst, yst=nyst, xtt=nxtt, ytt=nytt)


def eval_bundle(pack, s, t):
    """Deformed boundary bundle at parameters s (1-D array) and time t.

    Returns (p, p_s, p_ss, p_t, p_tt, p_st), each an (n,2) array.
    """
    curve_kind, curve_data, sp_ts, sp_cx, sp_cy, prim_kinds, prim_params = pack
    x, y, xs, ys, xss, yss = _curve_eval(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, s)
    z = np.zeros_like(x)
    st = dict(x=x, y=y, xs=xs, ys=ys, xss=xss, yss=yss,
              xt=z.copy(), yt=z.copy(), xtt=z.copy(), ytt=z.copy(),
              xst=z.copy(), yst=z.copy())
    _apply_chain_bundle(prim_kinds, prim_params, float(t), st)
    def two(a, b):
        return np.stack([a, b], axis=-1)
    return (two(st["x"], st["y"]), two(st["xs"], st["ys"]), two(st["xss"], st["yss"]),
            two(st["xt"], st["yt"]), two(st["xtt"], st["ytt"]), two(st["xst"], st["yst"]))


def eval_positions(pack, s, t):
    """Deformed boundary positions only, (n,2)."""
    curve_kind, curve_data, sp_ts, sp_cx, sp_cy, prim_kinds, prim_params = pack
    x, y, _, _, _, _ = _curve_eval(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, s)
    t = float(t)
    for k in range(prim_kinds.size):
        kind = int(prim_kinds[k])
        row = prim_params[k]
        if kind == 4:
            amp, _, _ = _profile(row, 0, t)
            axis = int(row[5]); w = row[6]; ph = row[7]
            if axis == 0:
                y = y + amp * np.sin(w * x + ph)
            else:
                x = x + amp * np.sin(w * y + ph)
            continue
        m, _, _, b, _, _ = _affine_terms(kind, row, t)
        x, y = m[0, 0] * x + m[0, 1] * y + b[0], m[1, 0] * x + m[1, 1] * y + b[1]
    return np.stack([x, y], axis=-1)


def _spatial_point(pack, s, t):
    """p, p_s, p_ss at a single scalar s (plain floats)."""
    p, ps, pss, _, _, _ = eval_bundle(pack, np.array([s]), t)
    return p[0], ps[0], pss[0]


def nearest_param(pack, rx, ry, t, n_scan, max_iter, tol):
    """Nearest boundary point: coarse scan then Newton on the stationarity
    condition g(s) = <r - p(s), p'(s)> = 0.

    Returns (s_star, dist, converged, ambiguous, s_second). Convergence is
    |g|/|p'| <= tol*(1+dist); ties between distinct local minima within 1e-9
    report ambiguous=1 and keep the smaller s.
    """
    s_grid = np.arange(n_scan, dtype=np.float64) / n_scan
    p = eval_positions(pack, s_grid, t)
    d2 = (p[:, 0] - rx) ** 2 + (p[:, 1] - ry) ** 2
    locmin = (d2 <= np.roll(d2, 1)) & (d2 <= np.roll(d2, -1))
    i0 = int(np.argmin(d2))

    def refine(i):
        s = s_grid[i]
        step_cap = 2.0 / n_scan
        converged = 0
        dist = 0.0
        for _ in range(max_iter):
            pp, ps, pss = _spatial_point(pack, s, t)
            ex, ey = rx - pp[0], ry - pp[1]
            dist = math.hypot(ex, ey)
            g = ex * ps[0] + ey * ps[1]
            speed2 = ps[0] * ps[0] + ps[1] * ps[1]
            if abs(g) / math.sqrt(speed2) <= tol * (1.0 + dist):
                converged = 1
                break
            gp = -speed2 + ex * pss[0] + ey * pss[1]
            if gp == 0.0:
                break
            step = -g / gp
            if step > step_cap:
                step = step_cap
            elif step < -step_cap:
                step = -step_cap
            s = (s + step) % 1.0
        return s, dist, converged

    s1, d1, conv1 = refine(i0)
    # runner-up local minimum, cyclically separated from the winner
    idx = np.flatnonzero(locmin)
    sep = np.minimum((idx - i0) % n_scan, (i0 - idx) % n_scan)
    idx = idx[sep > 2]
    ambiguous = 0
    s2_out = float("nan")
    if idx.size:
        i1 = int(idx[np.argmin(d2[idx])])
        s2, d2nd, conv2 = refine(i1)
        if conv2 and abs(d2nd - d1) <= 1e-9 and min(abs(s2 - s1), 1.0 - abs(s2 - s1)) > 1.0 / n_scan:
            ambiguous = 1
            s2_out = max(s1, s2)
            if s2 < s1:
                s1, d1 = s2, d2nd
    return float(s1), float(d1), int(conv1), int(ambiguous), float(s2_out)


def nearest_fields(pack, rx, ry, t, n_scan, max_iter, tol):
    """Fused query for the simulation loop: nearest point plus frame and
    motion fields there, as one flat float tuple

        (s, dist, converged, ambiguous, s_second,
         px, py, tx, ty, nx, ny, kappa, metric,
         vel_x, vel_y, acc_x, acc_y, v_n, v_t, a_n, sigma)
    """
    s1, dist, conv, amb, s2 = nearest_param(pack, rx, ry, t, n_scan, max_iter, tol)
    p, ps, pss, pt, ptt, pst = eval_bundle(pack, np.array([s1]), t)
    xs, ys = float(ps[0, 0]), float(ps[0, 1])
    xss, yss = float(pss[0, 0]), float(pss[0, 1])
    xt, yt = float(pt[0, 0]), float(pt[0, 1])
    xtt, ytt = float(ptt[0, 0]), float(ptt[0, 1])
    xst, yst = float(pst[0, 0]), float(pst[0, 1])
    metric = math.hypot(xs, ys)
    tx, ty = xs / metric, ys / metric
    nx, ny = -ty, tx
    kappa = (xs * yss - ys * xss) / metric ** 3
    return (s1, dist, conv, amb, s2, float(p[0, 0]), float(p[0, 1]),
            tx, ty, nx, ny, kappa, metric, xt, yt, xtt, ytt,
            xt * nx + yt * ny, xt * tx + yt * ty,
            xtt * nx + ytt * ny, (xst * nx + yst * ny) / metric)


def omega_sweep_max(a_n, v_n, v_t, sigma, kappa, d_lo, d_hi, v, half_axle, z):
    """Max over the field grid, both corridor ends and both root branches of
    the turn-rate demand

        half_axle*|a_n + (2*sigma*xi + kappa*xi^2 - d*sigma^2)/(1+kappa*d)| / sqrt(v^2-(v_n+z)^2) + v

    with xi = -v_t +- sqrt(v^2-(v_n+z)^2). Returns inf when the root or the
    corridor denominator degenerates anywhere (treated as a violation).
    """
    disc = v * v - (v_n + z) ** 2
    if np.any(disc <= 0.0):
        return float("inf")
    root = np.sqrt(disc)
    worst = 0.0
    for d in (d_lo, d_hi):
        denom = 1.0 + kappa * d
        if np.any(denom <= 0.0):
            return float("inf")
        for branch in (1.0, -1.0):
            xi = -v_t + branch * root
            val = half_axle * np.abs(a_n + (2.0 * sigma * xi + kappa * xi * xi - d * sigma * sigma) / denom) / root + v
            m = float(val.max())
            if m > worst:
                worst = m
    return worst
