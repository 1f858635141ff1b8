"""Single-probe ray queries: segment projection, hierarchical marching and
the eye-aligned O(1) fast path."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bake import ProbeData
from .kernels import HIT, MISS, UNKNOWN
from .octmap import oct_encode

STATUS_NAMES = {MISS: "MISS", HIT: "HIT", UNKNOWN: "UNKNOWN"}


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64)
        d = np.asarray(self.direction, dtype=np.float64)
        if abs(np.linalg.norm(d) - 1.0) > 1e-6:
            raise ValueError("ray direction must be unit length")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)


@dataclass(frozen=True)
class TraceConfig:
    eps_start: float = kernels.DEFAULT_EPS_START  # self-intersection offset
    eps_align: float = kernels.DEFAULT_EPS_ALIGN  # eye-at-probe threshold
    slack: float = kernels.DEFAULT_SLACK          # distance test tolerance
    bounds_pad: float = 0.5                       # meters beyond cloud bounds


DEFAULT_CONFIG = TraceConfig()


@dataclass(frozen=True)
class TraceOutcome:
    status: int
    texel: tuple | None = None       # (tx, ty) on the high-res maps
    uv: tuple | None = None          # texel center uv
    irradiance: tuple | None = None  # valid iff HIT
    fetches: int = 0

    @property
    def status_name(self):
        return STATUS_NAMES[self.status]


def _outcome(probe, status, tx, ty, fetches):
    if status == MISS or tx < 0:
        return TraceOutcome(status=status, fetches=fetches)
    res = probe.chain.res_hi
    uv = ((tx + 0.5) / res, (ty + 0.5) / res)
    irr = None
    if status == HIT:
        irr = tuple(float(c) for c in probe.chain.irradiance_hi[ty, tx])
    return TraceOutcome(status=status, texel=(tx, ty), uv=uv,
                        irradiance=irr, fetches=fetches)


def ray_exit_t(ray: Ray, probe: ProbeData, config=DEFAULT_CONFIG):
    """Ray parameter where the ray leaves the probe's padded cloud bounds;
    None when the ray never overlaps them."""
    lo = probe.bounds_lo - config.bounds_pad
    hi = probe.bounds_hi + config.bounds_pad
    t = kernels._exit_t(ray.origin[0], ray.origin[1], ray.origin[2],
                        ray.direction[0], ray.direction[1], ray.direction[2],
                        lo[0], lo[1], lo[2], hi[0], hi[1], hi[2])
    return None if t < 0.0 else float(t)


def compute_ray_segments(ray: Ray, probe: ProbeData, t_range=None,
                         config=DEFAULT_CONFIG):
    """Split [eps, t_exit] at probe-space coordinate-plane crossings so each
    piece projects without crossing an octahedral fold. At most 4 pieces."""
    w = ray.origin - probe.origin
    if t_range is None:
        t1 = ray_exit_t(ray, probe, config)
        if t1 is None:
            return []
        t0 = config.eps_start
    else:
        t0, t1 = t_range
        t0 = max(t0, config.eps_start)
    if t1 <= t0:
        return []
    bounds = np.empty(5)
    nb = kernels.compute_fold_boundaries(
        w[0], w[1], w[2],
        ray.direction[0], ray.direction[1], ray.direction[2],
        t0, t1, bounds)
    return [(float(bounds[i]), float(bounds[i + 1])) for i in range(nb - 1)
            if bounds[i + 1] - bounds[i] > 1e-12]


def distance_to_intersection(ray_origin_probe_space, direction, v):
    """Distance from the probe to the point of the ray lying along texel
    direction v (closed form; parallel rays degrade to |origin|)."""
    w = np.asarray(ray_origin_probe_space, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(kernels.distance_to_intersection_s(
        w[0], w[1], w[2], d[0], d[1], d[2], v[0], v[1], v[2]))


def _chord(probe, ray, t0, t1):
    w = ray.origin - probe.origin
    return kernels._chord_setup(
        w[0], w[1], w[2],
        ray.direction[0], ray.direction[1], ray.direction[2], t0, t1)


def low_resolution_tracing(probe: ProbeData, ray: Ray, t0, t1,
                           start_uv=None, config=DEFAULT_CONFIG):
    """Low-res marching of one segment: (found, uv_entry, uv_exit).

    Only looks for depth crossings; never consults the visibility map.
    start_uv (on the projected segment) resumes the march mid-chord.
    """
    p0u, p0v, p1u, p1v, l0, l1, aa, bb = _chord(probe, ray, t0, t1)
    s_begin = 0.0
    if start_uv is not None:
        du = p1u - p0u
        dv = p1v - p0v
        den = du * du + dv * dv
        if den > 0.0:
            s_begin = ((start_uv[0] - p0u) * du + (start_uv[1] - p0v) * dv) / den
            s_begin = min(max(s_begin, 0.0), 1.0)
    w = ray.origin - probe.origin
    found, s_in, s_out, ix, iy, fetches = kernels.low_res_scan(
        probe.chain.distance_lo, p0u, p0v, p1u, p1v, l0, l1, aa, bb,
        s_begin, w[0], w[1], w[2],
        ray.direction[0], ray.direction[1], ray.direction[2],
        probe.chain.res_hi, config.slack)
    du = p1u - p0u
    dv = p1v - p0v
    uv_in = (p0u + s_in * du, p0v + s_in * dv)
    uv_out = (p0u + s_out * du, p0v + s_out * dv)
    return bool(found), uv_in, (uv_out if found else None), fetches


def high_resolution_tracing(probe: ProbeData, ray: Ray, t0, t1,
                            uv, uv_end, config=DEFAULT_CONFIG):
    """High-res marching of the chord window [uv, uv_end]; checks the
    stored incoming direction for back faces. Returns a TraceOutcome."""
    p0u, p0v, p1u, p1v, l0, l1, aa, bb = _chord(probe, ray, t0, t1)
    du = p1u - p0u
    dv = p1v - p0v
    den = du * du + dv * dv
    if den > 0.0:
        s_in = ((uv[0] - p0u) * du + (uv[1] - p0v) * dv) / den
        s_out = ((uv_end[0] - p0u) * du + (uv_end[1] - p0v) * dv) / den
    else:
        s_in, s_out = 0.0, 1.0
    s_in = min(max(s_in, 0.0), 1.0)
    s_out = min(max(s_out, 0.0), 1.0)
    w = ray.origin - probe.origin
    status, tx, ty, fetches, occ_x, occ_y = kernels.high_res_scan(
        probe.chain.distance_hi, probe.chain.direction_hi,
        p0u, p0v, p1u, p1v, l0, l1, aa, bb, s_in, s_out,
        w[0], w[1], w[2],
        ray.direction[0], ray.direction[1], ray.direction[2], config.slack)
    if status == MISS and occ_x >= 0:
        # the ray passed behind a surface in this window and never resolved
        status, tx, ty = UNKNOWN, occ_x, occ_y
    return _outcome(probe, status, tx, ty, fetches)


def trace_one_ray_segment(probe: ProbeData, ray: Ray, t0, t1,
                          config=DEFAULT_CONFIG):
    """Two-level trace of one fold-free segment."""
    w = ray.origin - probe.origin
    status, tx, ty, fetches = kernels.trace_segment(
        probe.chain.distance_hi, probe.chain.direction_hi,
        probe.chain.distance_lo,
        w[0], w[1], w[2],
        ray.direction[0], ray.direction[1], ray.direction[2],
        t0, t1, config.slack)
    return _outcome(probe, status, tx, ty, fetches)


def trace_one_ray_segment_brute(probe: ProbeData, ray: Ray, t0, t1,
                                config=DEFAULT_CONFIG):
    """Single-level high-res marching of one segment (reference path)."""
    w = ray.origin - probe.origin
    status, tx, ty, fetches = kernels.trace_segment_brute(
        probe.chain.distance_hi, probe.chain.direction_hi,
        w[0], w[1], w[2],
        ray.direction[0], ray.direction[1], ray.direction[2],
        t0, t1, config.slack)
    return _outcome(probe, status, tx, ty, fetches)


def trace_one_probe(probe: ProbeData, ray: Ray, t_range=None,
                    config=DEFAULT_CONFIG):
    """Full single-probe query.

    Eye at the probe origin resolves with exactly one texel fetch;
    otherwise the fold-free segments are traced in order and the first
    non-MISS outcome wins.
    """
    offset = ray.origin - probe.origin
    if np.linalg.norm(offset) < config.eps_align and (
            t_range is None or t_range[0] <= 2 * config.eps_start):
        u, v = oct_encode(ray.direction)
        res = probe.chain.res_hi
        tx = min(int(u * res), res - 1)
        ty = min(int(v * res), res - 1)
        stored = probe.chain.distance_hi[ty, tx]
        if not np.isfinite(stored):
            return TraceOutcome(status=MISS, texel=(tx, ty),
                                uv=((tx + 0.5) / res, (ty + 0.5) / res),
                                fetches=1)
        if t_range is not None and stored > t_range[1] * (1 + config.slack):
            return TraceOutcome(status=MISS, fetches=1)
        return _outcome(probe, HIT, tx, ty, 1)

    segments = compute_ray_segments(ray, probe, t_range=t_range,
                                    config=config)
    fetches = 0
    for a, b in segments:
        out = trace_one_ray_segment(probe, ray, a, b, config=config)
        fetches += out.fetches
        if out.status != MISS:
            return TraceOutcome(status=out.status, texel=out.texel,
                                uv=out.uv, irradiance=out.irradiance,
                                fetches=fetches)
    return TraceOutcome(status=MISS, fetches=fetches)


def trace_one_probe_brute(probe: ProbeData, ray: Ray, t_range=None,
                          config=DEFAULT_CONFIG):
    """Reference: single-level marching over the same segments (the fast
    path is deliberately not taken)."""
    segments = compute_ray_segments(ray, probe, t_range=t_range,
                                    config=config)
    fetches = 0
    for a, b in segments:
        out = trace_one_ray_segment_brute(probe, ray, a, b, config=config)
        fetches += out.fetches
        if out.status != MISS:
            return TraceOutcome(status=out.status, texel=out.texel,
                                uv=out.uv, irradiance=out.irradiance,
                                fetches=fetches)
    return TraceOutcome(status=MISS, fetches=fetches)
