"""Numba backend: scalar-loop twins of the numpy reference kernels.

Same contracts as _numpy_ops (see its module docstring for the pack layout).
All jitted functions are cached so repeat imports skip compilation.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _profile_nb(row, off, t):
    offset = row[off]; slope = row[off + 1]; amp = row[off + 2]
    om = row[off + 3]; ph = row[off + 4]
    arg = om * t + ph
    s = math.sin(arg)
    c = math.cos(arg)
    return offset + slope * t + amp * s, slope + amp * om * c, -amp * om * om * s


@njit(cache=True)
def _curve_point(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, s):
    """x, y, xs, ys, xss, yss of the reference curve at scalar s."""
    s = s % 1.0
    if curve_kind == 0:
        cx = curve_data[0]; cy = curve_data[1]; r = curve_data[2]
        w = 2.0 * np.pi
        a = w * s
        ca = math.cos(a); sa = math.sin(a)
        return (cx + r * ca, cy + r * sa, -w * r * sa, w * r * ca,
                -w * w * r * ca, -w * w * r * sa)
    if curve_kind == 1:
        cx = curve_data[0]; cy = curve_data[1]; ea = curve_data[2]; eb = curve_data[3]
        w = 2.0 * np.pi
        a = w * s
        ca = math.cos(a); sa = math.sin(a)
        return (cx + ea * ca, cy + eb * sa, -w * ea * sa, w * eb * ca,
                -w * w * ea * ca, -w * w * eb * sa)
    if curve_kind == 2:
        # binary search for the knot interval
        lo = 0
        hi = sp_ts.size - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if sp_ts[mid] <= s:
                lo = mid
            else:
                hi = mid
        u = s - sp_ts[lo]
        c0x = sp_cx[0, lo]; c1x = sp_cx[1, lo]; c2x = sp_cx[2, lo]; c3x = sp_cx[3, lo]
        c0y = sp_cy[0, lo]; c1y = sp_cy[1, lo]; c2y = sp_cy[2, lo]; c3y = sp_cy[3, lo]
        x = ((c0x * u + c1x) * u + c2x) * u + c3x
        y = ((c0y * u + c1y) * u + c2y) * u + c3y
        xs = (3.0 * c0x * u + 2.0 * c1x) * u + c2x
        ys = (3.0 * c0y * u + 2.0 * c1y) * u + c2y
        return x, y, xs, ys, 6.0 * c0x * u + 2.0 * c1x, 6.0 * c0y * u + 2.0 * c1y
    # rounded polygon
    ltot = curve_data[0]
    n_pieces = int(curve_data[1])
    k = n_pieces - 1
    for j in range(n_pieces - 1):
        if s < curve_data[2 + 10 * (j + 1) + 1]:
            k = j
            break
    base = 2 + 10 * k
    ptype = curve_data[base]
    s0 = curve_data[base + 1]; s1 = curve_data[base + 2]
    frac = (s - s0) / (s1 - s0)
    if ptype == 0.0:
        x0 = curve_data[base + 3]; y0 = curve_data[base + 4]
        ux = curve_data[base + 5]; uy = curve_data[base + 6]
        plen = (s1 - s0) * ltot
        return (x0 + ux * plen * frac, y0 + uy * plen * frac,
                ux * ltot, uy * ltot, 0.0, 0.0)
    acx = curve_data[base + 3]; acy = curve_data[base + 4]
    r = curve_data[base + 5]; a0 = curve_data[base + 6]; da = curve_data[base + 7]
    ang = a0 + da * frac
    ca = math.cos(ang); sa = math.sin(ang)
    rate = da / (s1 - s0)
    return (acx + r * ca, acy + r * sa, -r * rate * sa, r * rate * ca,
            -r * rate * rate * ca, -r * rate * rate * sa)


@njit(cache=True)
def _affine_terms_nb(kind, row, t):
    """Flattened M, M', M'', b, b', b'' for one affine primitive at time t."""
    if kind == 0:
        px, dpx, ddpx = _profile_nb(row, 0, t)
        py, dpy, ddpy = _profile_nb(row, 5, t)
        return (1.0, 0.0, 0.0, 1.0,
                0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0,
                px, py, dpx, dpy, ddpx, ddpy)
    if kind == 1:
        ang, dang, ddang = _profile_nb(row, 0, t)
        cx, dcx, ddcx = _profile_nb(row, 5, t)
        cy, dcy, ddcy = _profile_nb(row, 10, t)
        ca = math.cos(ang); sa = math.sin(ang)
        m00 = ca; m01 = -sa; m10 = sa; m11 = ca
        j00 = -sa; j01 = -ca; j10 = ca; j11 = -sa
        dm00 = dang * j00; dm01 = dang * j01; dm10 = dang * j10; dm11 = dang * j11
        d2 = dang * dang
        ddm00 = ddang * j00 - d2 * m00; ddm01 = ddang * j01 - d2 * m01
        ddm10 = ddang * j10 - d2 * m10; ddm11 = ddang * j11 - d2 * m11
    elif kind == 2:
        ax, dax, ddax = _profile_nb(row, 0, t)
        ay, day, dday = _profile_nb(row, 5, t)
        cx, dcx, ddcx = _profile_nb(row, 10, t)
        cy, dcy, ddcy = _profile_nb(row, 15, t)
        m00 = ax; m01 = 0.0; m10 = 0.0; m11 = ay
        dm00 = dax; dm01 = 0.0; dm10 = 0.0; dm11 = day
        ddm00 = ddax; ddm01 = 0.0; ddm10 = 0.0; ddm11 = dday
    else:
        kx, dkx, ddkx = _profile_nb(row, 0, t)
        ky, dky, ddky = _profile_nb(row, 5, t)
        cx, dcx, ddcx = _profile_nb(row, 10, t)
        cy, dcy, ddcy = _profile_nb(row, 15, t)
        m00 = 1.0; m01 = kx; m10 = ky; m11 = 1.0
        dm00 = 0.0; dm01 = dkx; dm10 = dky; dm11 = 0.0
        ddm00 = 0.0; ddm01 = ddkx; ddm10 = ddky; ddm11 = 0.0
    b0 = cx - (m00 * cx + m01 * cy)
    b1 = cy - (m10 * cx + m11 * cy)
    db0 = dcx - (dm00 * cx + dm01 * cy) - (m00 * dcx + m01 * dcy)
    db1 = dcy - (dm10 * cx + dm11 * cy) - (m10 * dcx + m11 * dcy)
    ddb0 = ddcx - (ddm00 * cx + ddm01 * cy) - 2.0 * (dm00 * dcx + dm01 * dcy) - (m00 * ddcx + m01 * ddcy)
    ddb1 = ddcy - (ddm10 * cx + ddm11 * cy) - 2.0 * (dm10 * dcx + dm11 * dcy) - (m10 * ddcx + m11 * ddcy)
    return (m00, m01, m10, m11, dm00, dm01, dm10, dm11,
            ddm00, ddm01, ddm10, ddm11, b0, b1, db0, db1, ddb0, ddb1)


@njit(cache=True)
def _point_bundle(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                  prim_kinds, prim_params, s, t):
    """Full 12-component bundle at scalar (s, t)."""
    x, y, xs, ys, xss, yss = _curve_point(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, s)
    xt = 0.0; yt = 0.0; xtt = 0.0; ytt = 0.0; xst = 0.0; yst = 0.0
    for k in range(prim_kinds.size):
        kind = prim_kinds[k]
        row = prim_params[k]
        if kind == 4:
            amp, damp, ddamp = _profile_nb(row, 0, t)
            axis = int(row[5]); w = row[6]; ph = row[7]
            if axis == 0:
                c = x; cs = xs; css = xss; ct = xt; ctt = xtt; cst = xst
            else:
                c = y; cs = ys; css = yss; ct = yt; ctt = ytt; cst = yst
            f = math.sin(w * c + ph)
            fp = w * math.cos(w * c + ph)
            fpp = -w * w * f
            add = amp * f
            add_s = amp * fp * cs
            add_ss = amp * (fpp * cs * cs + fp * css)
            add_t = damp * f + amp * fp * ct
            add_st = damp * fp * cs + amp * (fpp * cs * ct + fp * cst)
            add_tt = ddamp * f + 2.0 * damp * fp * ct + amp * (fpp * ct * ct + fp * ctt)
            if axis == 0:
                y += add; ys += add_s; yss += add_ss
                yt += add_t; yst += add_st; ytt += add_tt
            else:
                x += add; xs += add_s; xss += add_ss
                xt += add_t; xst += add_st; xtt += add_tt
            continue
        (m00, m01, m10, m11, dm00, dm01, dm10, dm11,
         ddm00, ddm01, ddm10, ddm11, b0, b1, db0, db1, ddb0, ddb1) = _affine_terms_nb(kind, row, t)
        nx = m00 * x + m01 * y + b0
        ny = m10 * x + m11 * y + b1
        nxs = m00 * xs + m01 * ys
        nys = m10 * xs + m11 * ys
        nxss = m00 * xss + m01 * yss
        nyss = m10 * xss + m11 * yss
        nxt = dm00 * x + dm01 * y + db0 + m00 * xt + m01 * yt
        nyt = dm10 * x + dm11 * y + db1 + m10 * xt + m11 * yt
        nxst = dm00 * xs + dm01 * ys + m00 * xst + m01 * yst
        nyst = dm10 * xs + dm11 * ys + m10 * xst + m11 * yst
        nxtt = ddm00 * x + ddm01 * y + ddb0 + 2.0 * (dm00 * xt + dm01 * yt) + m00 * xtt + m01 * ytt
        nytt = ddm10 * x + ddm11 * y + ddb1 + 2.0 * (dm10 * xt + dm11 * yt) + m10 * xtt + m11 * ytt
        x = nx; y = ny; xs = nxs; ys = nys; xss = nxss; yss = nyss
        xt = nxt; yt = nyt; xst = nxst; yst = nyst; xtt = nxtt; ytt = nytt
    return x, y, xs, ys, xss, yss, xt, yt, xtt, ytt, xst, yst


@njit(cache=True)
def _point_pos(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
               prim_kinds, prim_params, s, t):
    x, y, _, _, _, _ = _curve_point(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, s)
    for k in range(prim_kinds.size):
        kind = prim_kinds[k]
        row = prim_params[k]
        if kind == 4:
            amp, _, _ = _profile_nb(row, 0, t)
            axis = int(row[5]); w = row[6]; ph = row[7]
            if axis == 0:
                y += amp * math.sin(w * x + ph)
            else:
                x += amp * math.sin(w * y + ph)
            continue
        (m00, m01, m10, m11, _, _, _, _, _, _, _, _,
         b0, b1, _, _, _, _) = _affine_terms_nb(kind, row, t)
        x, y = m00 * x + m01 * y + b0, m10 * x + m11 * y + b1
    return x, y


@njit(cache=True)
def _eval_positions_nb(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                       prim_kinds, prim_params, s, t):
    out = np.empty((s.size, 2))
    for i in range(s.size):
        x, y = _point_pos(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                          prim_kinds, prim_params, s[i], t)
        out[i, 0] = x
        out[i, 1] = y
    return out


@njit(cache=True)
def _eval_bundle_nb(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                    prim_kinds, prim_params, s, t):
    n = s.size
    p = np.empty((n, 2)); ps = np.empty((n, 2)); pss = np.empty((n, 2))
    pt = np.empty((n, 2)); ptt = np.empty((n, 2)); pst = np.empty((n, 2))
    for i in range(n):
        x, y, xs, ys, xss, yss, xt, yt, xtt, ytt, xst, yst = _point_bundle(
            curve_kind, curve_data, sp_ts, sp_cx, sp_cy, prim_kinds, prim_params, s[i], t)
        p[i, 0] = x; p[i, 1] = y
        ps[i, 0] = xs; ps[i, 1] = ys
        pss[i, 0] = xss; pss[i, 1] = yss
        pt[i, 0] = xt; pt[i, 1] = yt
        ptt[i, 0] = xtt; ptt[i, 1] = ytt
        pst[i, 0] = xst; pst[i, 1] = yst
    return p, ps, pss, pt, ptt, pst


@njit(cache=True)
def _newton_refine(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                   prim_kinds, prim_params, rx, ry, t, s, n_scan, max_iter, tol):
    step_cap = 2.0 / n_scan
    converged = 0
    dist = 0.0
    for _ in range(max_iter):
        (px, py, xs, ys, xss, yss,
         _, _, _, _, _, _) = _point_bundle(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                                           prim_kinds, prim_params, s, t)
        ex = rx - px; ey = ry - py
        dist = math.hypot(ex, ey)
        g = ex * xs + ey * ys
        speed2 = xs * xs + ys * ys
        if abs(g) / math.sqrt(speed2) <= tol * (1.0 + dist):
            converged = 1
            break
        gp = -speed2 + ex * xss + ey * yss
        if gp == 0.0:
            break
        step = -g / gp
        if step > step_cap:
            step = step_cap
        elif step < -step_cap:
            step = -step_cap
        s = (s + step) % 1.0
    return s, dist, converged


@njit(cache=True)
def _scan_points(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, n, xb, yb):
    """Reference curve at s = i/n for all i, using angle recurrences so the
    scan costs O(1) transcendentals per smooth piece instead of per point.
    """
    two_pi = 2.0 * np.pi
    if curve_kind == 0 or curve_kind == 1:
        cx = curve_data[0]; cy = curve_data[1]
        ax = curve_data[2]
        ay = curve_data[2] if curve_kind == 0 else curve_data[3]
        dang = two_pi / n
        cd = math.cos(dang); sd = math.sin(dang)
        c = 1.0; s = 0.0
        for i in range(n):
            xb[i] = cx + ax * c
            yb[i] = cy + ay * s
            c, s = c * cd - s * sd, s * cd + c * sd
        return
    if curve_kind == 2:
        m = sp_ts.size - 1
        for j in range(m):
            lo = sp_ts[j]; hi = sp_ts[j + 1]
            i0 = int(math.ceil(lo * n - 1e-9))
            i1 = n if j == m - 1 else int(math.ceil(hi * n - 1e-9))
            c0x = sp_cx[0, j]; c1x = sp_cx[1, j]; c2x = sp_cx[2, j]; c3x = sp_cx[3, j]
            c0y = sp_cy[0, j]; c1y = sp_cy[1, j]; c2y = sp_cy[2, j]; c3y = sp_cy[3, j]
            for i in range(i0, i1):
                u = i / n - lo
                xb[i] = ((c0x * u + c1x) * u + c2x) * u + c3x
                yb[i] = ((c0y * u + c1y) * u + c2y) * u + c3y
        return
    ltot = curve_data[0]
    n_pieces = int(curve_data[1])
    for k in range(n_pieces):
        base = 2 + 10 * k
        ptype = curve_data[base]
        s0 = curve_data[base + 1]; s1 = curve_data[base + 2]
        i0 = int(math.ceil(s0 * n - 1e-9))
        i1 = n if k == n_pieces - 1 else int(math.ceil(s1 * n - 1e-9))
        if i0 >= i1:
            continue
        if ptype == 0.0:
            x0 = curve_data[base + 3]; y0 = curve_data[base + 4]
            ux = curve_data[base + 5]; uy = curve_data[base + 6]
            for i in range(i0, i1):
                arc = (i / n - s0) * ltot
                xb[i] = x0 + ux * arc
                yb[i] = y0 + uy * arc
        else:
            acx = curve_data[base + 3]; acy = curve_data[base + 4]
            r = curve_data[base + 5]; a0 = curve_data[base + 6]; da = curve_data[base + 7]
            rate = da / (s1 - s0)
            ang0 = a0 + rate * (i0 / n - s0)
            dang = rate / n
            c = math.cos(ang0); s = math.sin(ang0)
            cd = math.cos(dang); sd = math.sin(dang)
            for i in range(i0, i1):
                xb[i] = acx + r * c
                yb[i] = acy + r * s
                c, s = c * cd - s * sd, s * cd + c * sd


@njit(cache=True)
def _apply_chain_points(prim_kinds, prim_params, t, n, xb, yb):
    """Positions-only primitive chain with all time profiles hoisted."""
    for k in range(prim_kinds.size):
        kind = prim_kinds[k]
        row = prim_params[k]
        if kind == 4:
            amp, _, _ = _profile_nb(row, 0, t)
            axis = int(row[5]); w = row[6]; ph = row[7]
            if axis == 0:
                for i in range(n):
                    yb[i] += amp * math.sin(w * xb[i] + ph)
            else:
                for i in range(n):
                    xb[i] += amp * math.sin(w * yb[i] + ph)
        else:
            (m00, m01, m10, m11, _, _, _, _, _, _, _, _,
             b0, b1, _, _, _, _) = _affine_terms_nb(kind, row, t)
            for i in range(n):
                x = xb[i]; y = yb[i]
                xb[i] = m00 * x + m01 * y + b0
                yb[i] = m10 * x + m11 * y + b1


@njit(cache=True)
def _nearest_nb(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                prim_kinds, prim_params, rx, ry, t, n_scan, max_iter, tol):
    xb = np.empty(n_scan)
    yb = np.empty(n_scan)
    _scan_points(curve_kind, curve_data, sp_ts, sp_cx, sp_cy, n_scan, xb, yb)
    _apply_chain_points(prim_kinds, prim_params, t, n_scan, xb, yb)
    d2 = np.empty(n_scan)
    for i in range(n_scan):
        dx = xb[i] - rx; dy = yb[i] - ry
        d2[i] = dx * dx + dy * dy
    i0 = 0
    best = d2[0]
    for i in range(1, n_scan):
        if d2[i] < best:
            best = d2[i]
            i0 = i
    s1, dist1, conv1 = _newton_refine(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                                      prim_kinds, prim_params, rx, ry, t,
                                      i0 / n_scan, n_scan, max_iter, tol)
    # runner-up local minimum cyclically separated from the winner
    i1 = -1
    second = np.inf
    for i in range(n_scan):
        sep = (i - i0) % n_scan
        if sep > n_scan - sep:
            sep = n_scan - sep
        if sep <= 2:
            continue
        if d2[i] <= d2[(i - 1) % n_scan] and d2[i] <= d2[(i + 1) % n_scan] and d2[i] < second:
            second = d2[i]
            i1 = i
    ambiguous = 0
    s2_out = np.nan
    if i1 >= 0:
        s2, dist2, conv2 = _newton_refine(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                                          prim_kinds, prim_params, rx, ry, t,
                                          i1 / n_scan, n_scan, max_iter, tol)
        gap = abs(s2 - s1)
        if gap > 0.5:
            gap = 1.0 - gap
        if conv2 == 1 and abs(dist2 - dist1) <= 1e-9 and gap > 1.0 / n_scan:
            ambiguous = 1
            if s2 < s1:
                s2_out = s1
                s1 = s2
                dist1 = dist2
            else:
                s2_out = s2
    return s1, dist1, conv1, ambiguous, s2_out


@njit(cache=True)
def _nearest_fields_nb(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                       prim_kinds, prim_params, rx, ry, t, n_scan, max_iter, tol):
    s1, dist1, conv, amb, s2 = _nearest_nb(curve_kind, curve_data, sp_ts, sp_cx, sp_cy,
                                           prim_kinds, prim_params, rx, ry, t,
                                           n_scan, max_iter, tol)
    (x, y, xs, ys, xss, yss,
     xt, yt, xtt, ytt, xst, yst) = _point_bundle(curve_kind, curve_data, sp_ts, sp_cx,
                                                 sp_cy, prim_kinds, prim_params, s1, t)
    metric = math.hypot(xs, ys)
    tx = xs / metric; ty = ys / metric
    nx = -ty; ny = tx
    kappa = (xs * yss - ys * xss) / (metric * metric * metric)
    vn = xt * nx + yt * ny
    vt = xt * tx + yt * ty
    an = xtt * nx + ytt * ny
    sigma = (xst * nx + yst * ny) / metric
    return (s1, dist1, conv, amb, s2, x, y, tx, ty, nx, ny, kappa, metric,
            xt, yt, xtt, ytt, vn, vt, an, sigma)


@njit(cache=True)
def _omega_sweep_nb(a_n, v_n, v_t, sigma, kappa, d_lo, d_hi, v, half_axle, z):
    worst = 0.0
    for i in range(a_n.size):
        disc = v * v - (v_n[i] + z) * (v_n[i] + z)
        if disc <= 0.0:
            return np.inf
        root = math.sqrt(disc)
        for jd in range(2):
            d = d_lo if jd == 0 else d_hi
            denom = 1.0 + kappa[i] * d
            if denom <= 0.0:
                return np.inf
            for jb in range(2):
                xi = -v_t[i] + (root if jb == 0 else -root)
                val = half_axle * abs(a_n[i] + (2.0 * sigma[i] * xi + kappa[i] * xi * xi
                                                - d * sigma[i] * sigma[i]) / denom) / root + v
                if val > worst:
                    worst = val
    return worst


def eval_positions(pack, s, t):
    """Deformed boundary positions only, (n,2)."""
    return _eval_positions_nb(*pack, np.asarray(s, dtype=np.float64), float(t))


def eval_bundle(pack, s, t):
    """Bundle (p, p_s, p_ss, p_t, p_tt, p_st) of (n,2) arrays at (s array, t)."""
    return _eval_bundle_nb(*pack, np.asarray(s, dtype=np.float64), float(t))


def nearest_param(pack, rx, ry, t, n_scan, max_iter, tol):
    """(s_star, dist, converged, ambiguous, s_second); see numpy backend."""
    s1, d1, conv, amb, s2 = _nearest_nb(*pack, float(rx), float(ry), float(t),
                                        n_scan, max_iter, tol)
    return float(s1), float(d1), int(conv), int(amb), float(s2)


def nearest_fields(pack, rx, ry, t, n_scan, max_iter, tol):
    """Fused hot-path query: nearest_param plus the frame/motion fields at the
    winner, all as plain floats; see the numpy backend for the field layout.
    """
    return _nearest_fields_nb(*pack, float(rx), float(ry), float(t),
                              n_scan, max_iter, tol)


def omega_sweep_max(a_n, v_n, v_t, sigma, kappa, d_lo, d_hi, v, half_axle, z):
    """Worst-case turn-rate demand over a field grid; see numpy backend."""
    return float(_omega_sweep_nb(np.ascontiguousarray(a_n), np.ascontiguousarray(v_n),
                                 np.ascontiguousarray(v_t), np.ascontiguousarray(sigma),
                                 np.ascontiguousarray(kappa),
                                 float(d_lo), float(d_hi), float(v), float(half_axle), float(z)))
