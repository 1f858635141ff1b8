"""Numba kernels for probe ray marching.

Within one fold-free ray segment the octahedral projection of the ray is a
straight line in uv space (perspective-parameterized), so both tracing
levels are 2D DDA walks along that chord. The low-resolution walk may only
skip a block when no high-resolution texel inside the block's chord window
could pass the crossing test; that conservativeness is what makes the
two-level tracer agree exactly with single-level marching.

Status codes: 0 = MISS, 1 = HIT, 2 = UNKNOWN.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

MISS = 0
HIT = 1
UNKNOWN = 2

# Distance comparison slack: absorbs texel quantization in the crossing test.
DEFAULT_SLACK = 1e-3
# Ray start offset to avoid self-intersection.
DEFAULT_EPS_START = 1e-4
# Eye counts as probe-aligned below this distance.
DEFAULT_EPS_ALIGN = 1e-4


@njit(cache=True, inline="always")
def _sign_nz(v):
    return 1.0 if v >= 0.0 else -1.0


@njit(cache=True)
def oct_encode_s(x, y, z):
    l1 = abs(x) + abs(y) + abs(z)
    px = x / l1
    pz = z / l1
    if y < 0.0:
        fx = _sign_nz(px) * (1.0 - abs(pz))
        fz = _sign_nz(pz) * (1.0 - abs(px))
        px = fx
        pz = fz
    return px * 0.5 + 0.5, pz * 0.5 + 0.5


@njit(cache=True)
def oct_decode_s(u, v):
    fx = u * 2.0 - 1.0
    fz = v * 2.0 - 1.0
    y = 1.0 - abs(fx) - abs(fz)
    if y < 0.0:
        ux = _sign_nz(fx) * (1.0 - abs(fz))
        uz = _sign_nz(fz) * (1.0 - abs(fx))
        fx = ux
        fz = uz
    inv = 1.0 / np.sqrt(fx * fx + y * y + fz * fz)
    return fx * inv, y * inv, fz * inv


@njit(cache=True)
def distance_to_intersection_s(wx, wy, wz, dx, dy, dz, vx, vy, vz):
    """Probe-origin distance of the ray point lying along texel direction v.

    Closed form: t = -((w x v) . (d x v)) / |d x v|^2, result |w + t d|.
    """
    ax = wy * vz - wz * vy
    ay = wz * vx - wx * vz
    az = wx * vy - wy * vx
    bx = dy * vz - dz * vy
    by = dz * vx - dx * vz
    bz = dx * vy - dy * vx
    denom = bx * bx + by * by + bz * bz
    if denom < 1e-12:
        return np.sqrt(wx * wx + wy * wy + wz * wz)
    t = -(ax * bx + ay * by + az * bz) / denom
    px = wx + t * dx
    py = wy + t * dy
    pz = wz + t * dz
    return np.sqrt(px * px + py * py + pz * pz)


@njit(cache=True, inline="always")
def _ray_radius(wx, wy, wz, dx, dy, dz, t):
    px = wx + t * dx
    py = wy + t * dy
    pz = wz + t * dz
    return np.sqrt(px * px + py * py + pz * pz)


@njit(cache=True, inline="always")
def _s_to_t(s, l0, l1, a, b):
    # perspective-correct chord parameter -> ray parameter
    denom = l1 + s * (l0 - l1)
    if denom <= 0.0:
        return b
    tau = s * l0 / denom
    return a + tau * (b - a)


@njit(cache=True)
def compute_fold_boundaries(wx, wy, wz, dx, dy, dz, t0, t1, out):
    """Ray parameters in [t0, t1] where a probe-space coordinate changes
    sign; fills out[0..n+1] with t0, sorted crossings, t1. Returns count."""
    n = 0
    tmp = np.empty(3)
    comps_w = (wx, wy, wz)
    comps_d = (dx, dy, dz)
    for axis in range(3):
        d = comps_d[axis]
        if d != 0.0:
            tc = -comps_w[axis] / d
            if t0 < tc < t1:
                tmp[n] = tc
                n += 1
    # insertion sort of at most 3 values
    for i in range(1, n):
        key = tmp[i]
        j = i - 1
        while j >= 0 and tmp[j] > key:
            tmp[j + 1] = tmp[j]
            j -= 1
        tmp[j + 1] = key
    out[0] = t0
    for i in range(n):
        out[i + 1] = tmp[i]
    out[n + 1] = t1
    return n + 2


@njit(cache=True)
def _chord_setup(wx, wy, wz, dx, dy, dz, a, b):
    """Project segment endpoints; returns (p0u, p0v, p1u, p1v, l0, l1,
    aa, bb) where aa/bb are the slightly shrunk segment bounds."""
    shrink = (b - a) * 1e-9 + 1e-12
    aa = a + shrink
    bb = b - shrink
    if bb < aa:
        aa = a
        bb = b
    x0 = wx + aa * dx
    y0 = wy + aa * dy
    z0 = wz + aa * dz
    x1 = wx + bb * dx
    y1 = wy + bb * dy
    z1 = wz + bb * dz
    l0 = abs(x0) + abs(y0) + abs(z0)
    l1 = abs(x1) + abs(y1) + abs(z1)
    n0 = np.sqrt(x0 * x0 + y0 * y0 + z0 * z0)
    n1 = np.sqrt(x1 * x1 + y1 * y1 + z1 * z1)
    p0u, p0v = oct_encode_s(x0 / n0, y0 / n0, z0 / n0)
    p1u, p1v = oct_encode_s(x1 / n1, y1 / n1, z1 / n1)
    return p0u, p0v, p1u, p1v, l0, l1, aa, bb


@njit(cache=True)
def high_res_scan(dist_hi, dir_hi,
                  p0u, p0v, p1u, p1v, l0, l1, aa, bb,
                  s_begin, s_end,
                  wx, wy, wz, dx, dy, dz, slack):
    """DDA over high-res texels crossed by the chord for s in
    [s_begin, s_end]. Returns (status, tx, ty, fetches, occ_x, occ_y).

    Each non-EMPTY texel is classified against the span of ray radii over
    the texel's chord window: a stored distance beyond the span means the
    surface is farther than the ray here (keep marching); inside the span
    the ray crosses the surface depth, so the texel is a hit candidate
    resolved by the stored incoming direction; in front of the span the
    ray passes behind the surface and is occluded from the probe's view at
    this texel. Occlusion does not stop the march (the ray may re-emerge
    and produce a genuine crossing later); the last occluding texel is
    reported so the caller can downgrade an otherwise-MISS segment to
    UNKNOWN."""
    res = dist_hi.shape[0]
    du = p1u - p0u
    dv = p1v - p0v
    eps_s = 1e-12
    s = s_begin
    qu = (p0u + s * du) * res
    qv = (p0v + s * dv) * res
    ix = int(np.floor(qu))
    iy = int(np.floor(qv))
    if ix < 0:
        ix = 0
    if ix > res - 1:
        ix = res - 1
    if iy < 0:
        iy = 0
    if iy > res - 1:
        iy = res - 1
    sdu = du * res
    sdv = dv * res
    step_x = 1 if sdu > 0.0 else -1
    step_y = 1 if sdv > 0.0 else -1
    if sdu != 0.0:
        nx = ix + 1 if step_x > 0 else ix
        t_max_x = s + (nx - qu) / sdu
        t_dx = abs(1.0 / sdu)
    else:
        t_max_x = np.inf
        t_dx = np.inf
    if sdv != 0.0:
        ny = iy + 1 if step_y > 0 else iy
        t_max_y = s + (ny - qv) / sdv
        t_dy = abs(1.0 / sdv)
    else:
        t_max_y = np.inf
        t_dy = np.inf

    fetches = 0
    occ_x = -1
    occ_y = -1
    while True:
        stored = dist_hi[iy, ix]
        fetches += 1
        if np.isfinite(stored):
            s_hi = t_max_x if t_max_x < t_max_y else t_max_y
            if s_hi > s_end:
                s_hi = s_end
            if s_hi > 1.0:
                s_hi = 1.0
            s_lo = s if s > 0.0 else 0.0
            cu = (ix + 0.5) / res
            cv = (iy + 0.5) / res
            vx, vy, vz = oct_decode_s(cu, cv)
            d2i = distance_to_intersection_s(wx, wy, wz, dx, dy, dz,
                                             vx, vy, vz)
            r_in = _ray_radius(wx, wy, wz, dx, dy, dz,
                               _s_to_t(s_lo, l0, l1, aa, bb))
            r_out = _ray_radius(wx, wy, wz, dx, dy, dz,
                                _s_to_t(s_hi, l0, l1, aa, bb))
            rmin = r_in if r_in < r_out else r_out
            if d2i < rmin:
                rmin = d2i
            rmax = r_in if r_in > r_out else r_out
            if d2i > rmax:
                rmax = d2i
            # thickness: a crossing may fall in a short EMPTY run before
            # this texel, leaving the stored distance a few window-widths
            # short of the ray; a silhouette jump is far larger than that
            thick = 4.0 * (rmax - rmin) + slack * rmin
            if stored < rmin - thick:
                occ_x = ix
                occ_y = iy
            elif stored < rmax * (1.0 + slack):
                nx_ = dir_hi[iy, ix, 0]
                ny_ = dir_hi[iy, ix, 1]
                nz_ = dir_hi[iy, ix, 2]
                # stored direction points probe -> surface point; a front
                # facing hit has the view ray roughly aligned with it
                if nx_ * dx + ny_ * dy + nz_ * dz > 0.0:
                    return HIT, ix, iy, fetches, occ_x, occ_y
                return UNKNOWN, ix, iy, fetches, occ_x, occ_y
        # advance to next cell
        if t_max_x < t_max_y:
            s = t_max_x
            t_max_x += t_dx
            ix += step_x
        else:
            s = t_max_y
            t_max_y += t_dy
            iy += step_y
        if s > s_end + eps_s or s > 1.0:
            return MISS, ix, iy, fetches, occ_x, occ_y
        if ix < 0 or ix >= res or iy < 0 or iy >= res:
            return MISS, ix, iy, fetches, occ_x, occ_y


@njit(cache=True)
def low_res_scan(dist_lo,
                 p0u, p0v, p1u, p1v, l0, l1, aa, bb,
                 s_begin,
                 wx, wy, wz, dx, dy, dz, res_hi, slack):
    """March low-res texels from chord parameter s_begin; returns
    (found, s_in, s_out, ix, iy, fetches).

    A block is flagged when the minimum stored distance in its 3x3
    neighborhood could undercut the ray radius anywhere inside the block's
    (margin-expanded) chord window. The 3x3 neighborhood covers high-res
    texels whose cells the chord crosses inside this window but whose
    centers fall in an adjacent block.
    """
    res = dist_lo.shape[0]
    du = p1u - p0u
    dv = p1v - p0v
    chord_len = np.sqrt(du * du + dv * dv)
    # margin: two high-res texels of chord travel (in s units)
    if chord_len * res_hi > 1e-9:
        margin = 2.0 / (res_hi * chord_len)
    else:
        margin = 2.0

    s = s_begin
    qu = (p0u + s * du) * res
    qv = (p0v + s * dv) * res
    ix = int(np.floor(qu))
    iy = int(np.floor(qv))
    if ix < 0:
        ix = 0
    if ix > res - 1:
        ix = res - 1
    if iy < 0:
        iy = 0
    if iy > res - 1:
        iy = res - 1
    sdu = du * res
    sdv = dv * res
    step_x = 1 if sdu > 0.0 else -1
    step_y = 1 if sdv > 0.0 else -1
    if sdu != 0.0:
        nx = ix + 1 if step_x > 0 else ix
        t_max_x = s + (nx - qu) / sdu
        t_dx = abs(1.0 / sdu)
    else:
        t_max_x = np.inf
        t_dx = np.inf
    if sdv != 0.0:
        ny = iy + 1 if step_y > 0 else iy
        t_max_y = s + (ny - qv) / sdv
        t_dy = abs(1.0 / sdv)
    else:
        t_max_y = np.inf
        t_dy = np.inf

    fetches = 0
    s_in = s
    while True:
        s_out = t_max_x if t_max_x < t_max_y else t_max_y
        if s_out > 1.0:
            s_out = 1.0
        # conservative neighborhood minimum
        m = np.inf
        for jy in range(iy - 1, iy + 2):
            if jy < 0 or jy >= res:
                continue
            for jx in range(ix - 1, ix + 2):
                if jx < 0 or jx >= res:
                    continue
                val = dist_lo[jy, jx]
                fetches += 1
                if val < m:
                    m = val
        if np.isfinite(m):
            s_a = s_in - margin
            if s_a < 0.0:
                s_a = 0.0
            s_b = s_out + margin
            if s_b > 1.0:
                s_b = 1.0
            r_a = _ray_radius(wx, wy, wz, dx, dy, dz,
                              _s_to_t(s_a, l0, l1, aa, bb))
            r_b = _ray_radius(wx, wy, wz, dx, dy, dz,
                              _s_to_t(s_b, l0, l1, aa, bb))
            rmax = r_a if r_a > r_b else r_b
            if m < rmax * (1.0 + slack):
                return True, s_in, s_out, ix, iy, fetches
        # advance
        if t_max_x < t_max_y:
            s_in = t_max_x
            t_max_x += t_dx
            ix += step_x
        else:
            s_in = t_max_y
            t_max_y += t_dy
            iy += step_y
        if s_in >= 1.0:
            return False, s_in, 1.0, ix, iy, fetches
        if ix < 0 or ix >= res or iy < 0 or iy >= res:
            return False, s_in, 1.0, ix, iy, fetches


@njit(cache=True)
def trace_segment(dist_hi, dir_hi, dist_lo,
                  wx, wy, wz, dx, dy, dz, a, b, slack):
    """Two-level trace of one fold-free segment [a, b].

    One continuous low-res DDA; each flagged block is refined at high
    resolution over the block's chord window before the walk continues.
    The first candidate texel wins; a segment that saw the ray pass behind
    a surface without ever resolving reports UNKNOWN at the last occluding
    texel. Returns (status, tx, ty, fetches).
    """
    res_hi = dist_hi.shape[0]
    p0u, p0v, p1u, p1v, l0, l1, aa, bb = _chord_setup(
        wx, wy, wz, dx, dy, dz, a, b)
    res = dist_lo.shape[0]
    du = p1u - p0u
    dv = p1v - p0v
    chord_len = np.sqrt(du * du + dv * dv)
    if chord_len * res_hi > 1e-9:
        margin = 2.0 / (res_hi * chord_len)
    else:
        margin = 2.0

    qu = p0u * res
    qv = p0v * res
    ix = int(np.floor(qu))
    iy = int(np.floor(qv))
    if ix < 0:
        ix = 0
    if ix > res - 1:
        ix = res - 1
    if iy < 0:
        iy = 0
    if iy > res - 1:
        iy = res - 1
    sdu = du * res
    sdv = dv * res
    step_x = 1 if sdu > 0.0 else -1
    step_y = 1 if sdv > 0.0 else -1
    if sdu != 0.0:
        nx = ix + 1 if step_x > 0 else ix
        t_max_x = (nx - qu) / sdu
        t_dx = abs(1.0 / sdu)
    else:
        t_max_x = np.inf
        t_dx = np.inf
    if sdv != 0.0:
        ny = iy + 1 if step_y > 0 else iy
        t_max_y = (ny - qv) / sdv
        t_dy = abs(1.0 / sdv)
    else:
        t_max_y = np.inf
        t_dy = np.inf

    fetches = 0
    occ_x = -1
    occ_y = -1
    s_in = 0.0
    while True:
        s_out = t_max_x if t_max_x < t_max_y else t_max_y
        if s_out > 1.0:
            s_out = 1.0
        m = np.inf
        for jy in range(iy - 1, iy + 2):
            if jy < 0 or jy >= res:
                continue
            for jx in range(ix - 1, ix + 2):
                if jx < 0 or jx >= res:
                    continue
                val = dist_lo[jy, jx]
                fetches += 1
                if val < m:
                    m = val
        if np.isfinite(m):
            s_a = s_in - margin
            if s_a < 0.0:
                s_a = 0.0
            s_b = s_out + margin
            if s_b > 1.0:
                s_b = 1.0
            r_a = _ray_radius(wx, wy, wz, dx, dy, dz,
                              _s_to_t(s_a, l0, l1, aa, bb))
            r_b = _ray_radius(wx, wy, wz, dx, dy, dz,
                              _s_to_t(s_b, l0, l1, aa, bb))
            rmax = r_a if r_a > r_b else r_b
            if m < rmax * (1.0 + slack):
                status, tx, ty, f, ox, oy = high_res_scan(
                    dist_hi, dir_hi, p0u, p0v, p1u, p1v, l0, l1, aa, bb,
                    s_in, s_out, wx, wy, wz, dx, dy, dz, slack)
                fetches += f
                if ox >= 0:
                    occ_x = ox
                    occ_y = oy
                if status != MISS:
                    return status, tx, ty, fetches
        # advance the low-res walk
        if t_max_x < t_max_y:
            s_in = t_max_x
            t_max_x += t_dx
            ix += step_x
        else:
            s_in = t_max_y
            t_max_y += t_dy
            iy += step_y
        if s_in >= 1.0 or ix < 0 or ix >= res or iy < 0 or iy >= res:
            if occ_x >= 0:
                return UNKNOWN, occ_x, occ_y, fetches
            return MISS, -1, -1, fetches


@njit(cache=True)
def trace_segment_brute(dist_hi, dir_hi,
                        wx, wy, wz, dx, dy, dz, a, b, slack):
    """Single-level high-res marching of one segment (reference tracer)."""
    p0u, p0v, p1u, p1v, l0, l1, aa, bb = _chord_setup(
        wx, wy, wz, dx, dy, dz, a, b)
    status, tx, ty, fetches, occ_x, occ_y = high_res_scan(
        dist_hi, dir_hi, p0u, p0v, p1u, p1v, l0, l1,
        aa, bb, 0.0, 1.0, wx, wy, wz, dx, dy, dz, slack)
    if status == MISS and occ_x >= 0:
        return UNKNOWN, occ_x, occ_y, fetches
    return status, tx, ty, fetches


@njit(cache=True)
def trace_probe_range(dist_hi, dir_hi, dist_lo,
                      wx, wy, wz, dx, dy, dz, t0, t1, slack):
    """Segment loop of one probe over ray range [t0, t1] (probe space ray
    origin w). Returns (status, tx, ty, fetches)."""
    bounds = np.empty(5)
    nb = compute_fold_boundaries(wx, wy, wz, dx, dy, dz, t0, t1, bounds)
    fetches = 0
    for i in range(nb - 1):
        a = bounds[i]
        b = bounds[i + 1]
        if b - a < 1e-12:
            continue
        status, tx, ty, f = trace_segment(
            dist_hi, dir_hi, dist_lo, wx, wy, wz, dx, dy, dz, a, b, slack)
        fetches += f
        if status != MISS:
            return status, tx, ty, fetches
    return MISS, -1, -1, fetches


@njit(cache=True)
def trace_probe_range_brute(dist_hi, dir_hi,
                            wx, wy, wz, dx, dy, dz, t0, t1, slack):
    bounds = np.empty(5)
    nb = compute_fold_boundaries(wx, wy, wz, dx, dy, dz, t0, t1, bounds)
    fetches = 0
    for i in range(nb - 1):
        a = bounds[i]
        b = bounds[i + 1]
        if b - a < 1e-12:
            continue
        status, tx, ty, f = trace_segment_brute(
            dist_hi, dir_hi, wx, wy, wz, dx, dy, dz, a, b, slack)
        fetches += f
        if status != MISS:
            return status, tx, ty, fetches
    return MISS, -1, -1, fetches


@njit(cache=True, inline="always")
def _exit_t(ox, oy, oz, dx, dy, dz, lox, loy, loz, hix, hiy, hiz):
    """Largest t where the ray is still inside the padded AABB; -1 if the
    ray never overlaps it."""
    t_near = -np.inf
    t_far = np.inf
    for axis in range(3):
        if axis == 0:
            o, d, lo, hi = ox, dx, lox, hix
        elif axis == 1:
            o, d, lo, hi = oy, dy, loy, hiy
        else:
            o, d, lo, hi = oz, dz, loz, hiz
        if d == 0.0:
            if o < lo or o > hi:
                return -1.0
        else:
            ta = (lo - o) / d
            tb = (hi - o) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t_near:
                t_near = ta
            if tb < t_far:
                t_far = tb
    if t_far < t_near or t_far < 0.0:
        return -1.0
    return t_far


@njit(cache=True, parallel=True)
def render_single_probe(dist_hi, dir_hi, irr_hi, dist_lo,
                        origin, eye, dirs,
                        blo, bhi,
                        eps_start, slack,
                        out_status, out_rgb, out_fetch):
    """Full-marching render against one probe. dirs is (N, 3) unit."""
    wx = eye[0] - origin[0]
    wy = eye[1] - origin[1]
    wz = eye[2] - origin[2]
    n = dirs.shape[0]
    for i in prange(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        t1 = _exit_t(eye[0], eye[1], eye[2], dx, dy, dz,
                     blo[0], blo[1], blo[2], bhi[0], bhi[1], bhi[2])
        if t1 <= eps_start:
            out_status[i] = MISS
            out_fetch[i] = 0
            continue
        status, tx, ty, f = trace_probe_range(
            dist_hi, dir_hi, dist_lo, wx, wy, wz, dx, dy, dz,
            eps_start, t1, slack)
        out_status[i] = status
        out_fetch[i] = f
        if status == HIT:
            out_rgb[i, 0] = irr_hi[ty, tx, 0]
            out_rgb[i, 1] = irr_hi[ty, tx, 1]
            out_rgb[i, 2] = irr_hi[ty, tx, 2]


@njit(cache=True)
def _trace_probes_ordered(dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
                          origins, order,
                          ex, ey, ez, dx, dy, dz, t0, t1,
                          eps_start, eps_align, slack, rgb_out):
    """Loop probes in the given order over ray range [t0, t1]; MISS or
    UNKNOWN falls through to the next probe. Returns
    (status, probe_idx, tx, ty, fetches)."""
    last_unknown_p = -1
    last_tx = -1
    last_ty = -1
    fetches = 0
    for oi in range(order.shape[0]):
        p = order[oi]
        wx = ex - origins[p, 0]
        wy = ey - origins[p, 1]
        wz = ez - origins[p, 2]
        wlen = np.sqrt(wx * wx + wy * wy + wz * wz)
        if wlen < eps_align and t0 <= eps_start * 2.0:
            # eye aligned with this probe: single lookup
            u, v = oct_encode_s(dx, dy, dz)
            res = dist_hi_all.shape[1]
            tx = int(u * res)
            ty = int(v * res)
            if tx > res - 1:
                tx = res - 1
            if ty > res - 1:
                ty = res - 1
            stored = dist_hi_all[p, ty, tx]
            fetches += 1
            if np.isfinite(stored) and stored <= t1 * (1.0 + slack):
                rgb_out[0] = irr_all[p, ty, tx, 0]
                rgb_out[1] = irr_all[p, ty, tx, 1]
                rgb_out[2] = irr_all[p, ty, tx, 2]
                return HIT, p, tx, ty, fetches
            continue
        status, tx, ty, f = trace_probe_range(
            dist_hi_all[p], dir_hi_all[p], dist_lo_all[p],
            wx, wy, wz, dx, dy, dz, t0, t1, slack)
        fetches += f
        if status == HIT:
            rgb_out[0] = irr_all[p, ty, tx, 0]
            rgb_out[1] = irr_all[p, ty, tx, 1]
            rgb_out[2] = irr_all[p, ty, tx, 2]
            return HIT, p, tx, ty, fetches
        if status == UNKNOWN:
            last_unknown_p = p
            last_tx = tx
            last_ty = ty
    if last_unknown_p >= 0:
        return UNKNOWN, last_unknown_p, last_tx, last_ty, fetches
    return MISS, -1, -1, -1, fetches


@njit(cache=True)
def trace_grid_ray(dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
                   origins, grid_origin, cell, nx, ny, nz,
                   ex, ey, ez, dx, dy, dz,
                   eps_start, eps_align, slack, rgb_out):
    """Cube-walk trace: 3D DDA over grid cubes, 8 corner probes per cube
    ordered by distance to the eye, ray range clamped per cube.

    Returns (status, probe_idx, tx, ty, fetches)."""
    cx = nx - 1
    cy = ny - 1
    cz = nz - 1
    gx0 = grid_origin[0]
    gy0 = grid_origin[1]
    gz0 = grid_origin[2]
    # entry/exit of the whole grid
    t_near = -np.inf
    t_far = np.inf
    for axis in range(3):
        if axis == 0:
            o, d, lo, hi = ex, dx, gx0, gx0 + cx * cell
        elif axis == 1:
            o, d, lo, hi = ey, dy, gy0, gy0 + cy * cell
        else:
            o, d, lo, hi = ez, dz, gz0, gz0 + cz * cell
        if d == 0.0:
            if o < lo or o > hi:
                return MISS, -1, -1, -1, 0
        else:
            ta = (lo - o) / d
            tb = (hi - o) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t_near:
                t_near = ta
            if tb < t_far:
                t_far = tb
    if t_far < t_near or t_far <= 0.0:
        return MISS, -1, -1, -1, 0
    t_enter = t_near if t_near > 0.0 else 0.0

    # initial cube
    t_probe = t_enter + 1e-9
    px = (ex + t_probe * dx - gx0) / cell
    py = (ey + t_probe * dy - gy0) / cell
    pz = (ez + t_probe * dz - gz0) / cell
    ci = int(np.floor(px))
    cj = int(np.floor(py))
    ck = int(np.floor(pz))
    if ci < 0:
        ci = 0
    if ci > cx - 1:
        ci = cx - 1
    if cj < 0:
        cj = 0
    if cj > cy - 1:
        cj = cy - 1
    if ck < 0:
        ck = 0
    if ck > cz - 1:
        ck = cz - 1

    step_i = 1 if dx > 0.0 else -1
    step_j = 1 if dy > 0.0 else -1
    step_k = 1 if dz > 0.0 else -1
    if dx != 0.0:
        nx_b = gx0 + (ci + (1 if step_i > 0 else 0)) * cell
        t_max_i = (nx_b - ex) / dx
        t_d_i = abs(cell / dx)
    else:
        t_max_i = np.inf
        t_d_i = np.inf
    if dy != 0.0:
        ny_b = gy0 + (cj + (1 if step_j > 0 else 0)) * cell
        t_max_j = (ny_b - ey) / dy
        t_d_j = abs(cell / dy)
    else:
        t_max_j = np.inf
        t_d_j = np.inf
    if dz != 0.0:
        nz_b = gz0 + (ck + (1 if step_k > 0 else 0)) * cell
        t_max_k = (nz_b - ez) / dz
        t_d_k = abs(cell / dz)
    else:
        t_max_k = np.inf
        t_d_k = np.inf

    corner_idx = np.empty(8, dtype=np.int64)
    corner_d2 = np.empty(8)
    order = np.empty(8, dtype=np.int64)
    fetches = 0
    best_p = -1
    best_tx = -1
    best_ty = -1

    t_cur = t_enter
    while True:
        t_exit_cube = t_max_i
        if t_max_j < t_exit_cube:
            t_exit_cube = t_max_j
        if t_max_k < t_exit_cube:
            t_exit_cube = t_max_k
        if t_exit_cube > t_far:
            t_exit_cube = t_far

        # corner probes, lexicographic (i, j, k) base order
        c = 0
        for di in range(2):
            for dj in range(2):
                for dk in range(2):
                    pi = ci + di
                    pj = cj + dj
                    pk = ck + dk
                    idx = (pi * ny + pj) * nz + pk
                    ox = origins[idx, 0] - ex
                    oy = origins[idx, 1] - ey
                    oz = origins[idx, 2] - ez
                    corner_idx[c] = idx
                    corner_d2[c] = ox * ox + oy * oy + oz * oz
                    c += 1
        for c in range(8):
            order[c] = c
        for c in range(1, 8):  # stable insertion sort keeps lexicographic ties
            key_d = corner_d2[order[c]]
            key_o = order[c]
            j = c - 1
            while j >= 0 and corner_d2[order[j]] > key_d:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = key_o
        probe_order = np.empty(8, dtype=np.int64)
        for c in range(8):
            probe_order[c] = corner_idx[order[c]]

        status, p, tx, ty, f = _trace_probes_ordered(
            dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
            origins, probe_order,
            ex, ey, ez, dx, dy, dz, max(t_cur, 0.0), t_exit_cube,
            eps_start, eps_align, slack, rgb_out)
        fetches += f
        if status == HIT:
            return HIT, p, tx, ty, fetches
        if status == UNKNOWN:
            # diagnostic only: the grid outcome for an exhausted walk is MISS
            best_p = p
            best_tx = tx
            best_ty = ty

        # step to the next cube
        if t_max_i <= t_max_j and t_max_i <= t_max_k:
            t_cur = t_max_i
            t_max_i += t_d_i
            ci += step_i
            if ci < 0 or ci >= cx:
                break
        elif t_max_j <= t_max_k:
            t_cur = t_max_j
            t_max_j += t_d_j
            cj += step_j
            if cj < 0 or cj >= cy:
                break
        else:
            t_cur = t_max_k
            t_max_k += t_d_k
            ck += step_k
            if ck < 0 or ck >= cz:
                break
        if t_cur >= t_far:
            break
    return MISS, best_p, best_tx, best_ty, fetches


@njit(cache=True, parallel=True)
def render_grid(dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
                origins, grid_origin, cell, nx, ny, nz,
                eye, dirs, eps_start, eps_align, slack,
                out_status, out_rgb, out_fetch):
    n = dirs.shape[0]
    for i in prange(n):
        rgb = np.zeros(3)
        status, p, tx, ty, f = trace_grid_ray(
            dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
            origins, grid_origin, cell, nx, ny, nz,
            eye[0], eye[1], eye[2], dirs[i, 0], dirs[i, 1], dirs[i, 2],
            eps_start, eps_align, slack, rgb)
        out_status[i] = status
        out_fetch[i] = f
        if status == HIT:
            out_rgb[i, 0] = rgb[0]
            out_rgb[i, 1] = rgb[1]
            out_rgb[i, 2] = rgb[2]


@njit(cache=True, parallel=True)
def render_few_probes(dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
                      origins, blo, bhi,
                      eye, dirs, eps_start, eps_align, slack,
                      out_status, out_rgb, out_fetch):
    """Render against an explicit probe list with nearest-to-eye ordering
    and MISS-or-UNKNOWN fallback (no cube restriction)."""
    n_probes = origins.shape[0]
    order = np.empty(n_probes, dtype=np.int64)
    d2 = np.empty(n_probes)
    for p in range(n_probes):
        ox = origins[p, 0] - eye[0]
        oy = origins[p, 1] - eye[1]
        oz = origins[p, 2] - eye[2]
        d2[p] = ox * ox + oy * oy + oz * oz
        order[p] = p
    for c in range(1, n_probes):
        key_d = d2[order[c]]
        key_o = order[c]
        j = c - 1
        while j >= 0 and d2[order[j]] > key_d:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key_o

    n = dirs.shape[0]
    for i in prange(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        t1 = _exit_t(eye[0], eye[1], eye[2], dx, dy, dz,
                     blo[0], blo[1], blo[2], bhi[0], bhi[1], bhi[2])
        if t1 <= eps_start:
            out_status[i] = MISS
            out_fetch[i] = 0
            continue
        rgb = np.zeros(3)
        status, p, tx, ty, f = _trace_probes_ordered(
            dist_hi_all, dir_hi_all, irr_all, dist_lo_all,
            origins, order, eye[0], eye[1], eye[2], dx, dy, dz,
            eps_start, t1, eps_start, eps_align, slack, rgb)
        out_status[i] = status
        out_fetch[i] = f
        if status == HIT:
            out_rgb[i, 0] = rgb[0]
            out_rgb[i, 1] = rgb[1]
            out_rgb[i, 2] = rgb[2]
