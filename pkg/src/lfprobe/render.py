"""CPU renderer: camera poses to images by per-pixel probe tracing, frame
timing and image-quality metrics."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from . import kernels
from .bake import ProbeData
from .grid import ProbeGrid, ProbeSet
from .kernels import HIT, MISS, UNKNOWN
from .octmap import oct_encode
from .trace import DEFAULT_CONFIG

BACKGROUND = (0.0, 0.0, 0.0)
UNKNOWN_COLOR = (1.0, 0.0, 1.0)  # magenta makes occlusion failures visible


@dataclass(frozen=True)
class Camera:
    eye: tuple
    forward: tuple
    up: tuple = (0.0, 1.0, 0.0)
    vfov_deg: float = 60.0
    width: int = 512
    height: int = 512

    def basis(self):
        """Orthonormal (right, up, forward)."""
        f = np.asarray(self.forward, dtype=np.float64)
        f = f / np.linalg.norm(f)
        u = np.asarray(self.up, dtype=np.float64)
        r = np.cross(f, u)
        n = np.linalg.norm(r)
        if n < 1e-9:
            # looking straight along up: substitute a perpendicular axis
            u = np.array([0.0, 0.0, 1.0]) if abs(f[2]) < 0.9 \
                else np.array([1.0, 0.0, 0.0])
            r = np.cross(f, u)
            n = np.linalg.norm(r)
        r /= n
        u = np.cross(r, f)
        return r, u, f

    def ray_directions(self):
        """Unit directions through all pixel centers, shape (H*W, 3),
        row-major from the top-left pixel."""
        r, u, f = self.basis()
        tan_v = np.tan(np.radians(self.vfov_deg) / 2.0)
        tan_h = tan_v * self.width / self.height
        xs = ((np.arange(self.width) + 0.5) / self.width * 2.0 - 1.0) * tan_h
        ys = (1.0 - (np.arange(self.height) + 0.5) / self.height * 2.0) * tan_v
        gx, gy = np.meshgrid(xs, ys)
        dirs = (f[None, None, :] + gx[..., None] * r[None, None, :]
                + gy[..., None] * u[None, None, :])
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        return dirs.reshape(-1, 3)


@dataclass
class Frame:
    pixels: np.ndarray          # (H, W, 3) float32 in [0, 1]
    status: np.ndarray          # (H, W) uint8 trace status per pixel
    stats: dict = field(default_factory=dict)

    @property
    def rgb8(self):
        return np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)


def _stats(status, fetch, elapsed_s):
    n = status.size
    return {
        "traceMs": elapsed_s * 1000.0,
        "perPixelTexelFetches": float(fetch.mean()) if n else 0.0,
        "missFraction": float((status == MISS).sum() / n),
        "unknownFraction": float((status == UNKNOWN).sum() / n),
    }


def _lookup_render(probe: ProbeData, dirs):
    """Eye-at-probe fast path: one octahedral lookup per pixel."""
    c = probe.chain
    res = c.res_hi
    uv = oct_encode(dirs)
    tx = np.minimum((uv[:, 0] * res).astype(np.int64), res - 1)
    ty = np.minimum((uv[:, 1] * res).astype(np.int64), res - 1)
    stored = c.distance_hi[ty, tx]
    hit = np.isfinite(stored)
    status = np.where(hit, HIT, MISS).astype(np.uint8)
    # masking by multiply keeps the cost independent of the hit fraction
    # (EMPTY texels bake black irradiance, so misses recolor downstream)
    rgb = c.irradiance_hi[ty, tx] * hit[:, None]
    return status, rgb.astype(np.float32), np.ones(len(dirs), dtype=np.int64)


def render_frame(source, cam: Camera, config=DEFAULT_CONFIG,
                 background=BACKGROUND, unknown_color=UNKNOWN_COLOR) -> Frame:
    """Trace a primary ray through every pixel center.

    source is a ProbeData, a ProbeGrid, or a list of probes (2..7 probe
    fallback). HIT pixels take the stored irradiance, MISS the background
    color, UNKNOWN the debug color.
    """
    dirs = cam.ray_directions()
    eye = np.asarray(cam.eye, dtype=np.float64)
    n = len(dirs)
    status = np.zeros(n, dtype=np.uint8)
    rgb = np.zeros((n, 3), dtype=np.float64)
    fetch = np.zeros(n, dtype=np.int64)

    start = time.perf_counter()
    if isinstance(source, ProbeData):
        if np.linalg.norm(eye - source.origin) < config.eps_align:
            status, rgb, fetch = _lookup_render(source, dirs)
        else:
            c = source.chain
            kernels.render_single_probe(
                c.distance_hi, c.direction_hi, c.irradiance_hi,
                c.distance_lo, source.origin, eye, dirs,
                source.bounds_lo - config.bounds_pad,
                source.bounds_hi + config.bounds_pad,
                config.eps_start, config.slack, status, rgb, fetch)
    elif isinstance(source, ProbeGrid):
        ps = source.probe_set
        nx, ny, nz = source.dims
        kernels.render_grid(
            ps.dist_hi, ps.dir_hi, ps.irr_hi, ps.dist_lo, ps.origins,
            source.grid_origin, source.cell_size, nx, ny, nz,
            eye, dirs, config.eps_start, config.eps_align, config.slack,
            status, rgb, fetch)
    else:
        ps = source if isinstance(source, ProbeSet) else ProbeSet(list(source))
        lo, hi = ps.bounds
        kernels.render_few_probes(
            ps.dist_hi, ps.dir_hi, ps.irr_hi, ps.dist_lo, ps.origins,
            lo - config.bounds_pad, hi + config.bounds_pad,
            eye, dirs, config.eps_start, config.eps_align, config.slack,
            status, rgb, fetch)
    elapsed = time.perf_counter() - start

    rgb = rgb.astype(np.float32)
    rgb[status == MISS] = np.asarray(background, dtype=np.float32)
    rgb[status == UNKNOWN] = np.asarray(unknown_color, dtype=np.float32)
    frame = Frame(pixels=rgb.reshape(cam.height, cam.width, 3),
                  status=status.reshape(cam.height, cam.width),
                  stats=_stats(status, fetch, elapsed))
    return frame


def psnr(a, b):
    """Peak-signal-to-noise ratio in dB over 8-bit RGB; +inf for identical
    frames."""
    pa = a.rgb8 if isinstance(a, Frame) else np.asarray(a)
    pb = b.rgb8 if isinstance(b, Frame) else np.asarray(b)
    if pa.shape != pb.shape:
        raise ValueError(f"frame shapes differ: {pa.shape} vs {pb.shape}")
    mse = np.mean((pa.astype(np.float64) - pb.astype(np.float64)) ** 2)
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(255.0 ** 2 / mse)


def bench_views(source, cams, warmup=3, reps=20, config=DEFAULT_CONFIG):
    """Median frame time per camera over reps after warmup; the relative
    spread of the medians measures scene-complexity independence."""
    if len(cams) < 1:
        raise ValueError("bench_views needs at least one camera")
    views = []
    for ci, cam in enumerate(cams):
        for _ in range(warmup):
            render_frame(source, cam, config=config)
        times = []
        frame = None
        for _ in range(reps):
            t0 = time.perf_counter()
            frame = render_frame(source, cam, config=config)
            times.append((time.perf_counter() - t0) * 1000.0)
        views.append({
            "view": ci,
            "medianMs": float(np.median(times)),
            "minMs": float(np.min(times)),
            "maxMs": float(np.max(times)),
            "missFraction": frame.stats["missFraction"],
            "unknownFraction": frame.stats["unknownFraction"],
            "perPixelTexelFetches": frame.stats["perPixelTexelFetches"],
        })
    medians = np.array([v["medianMs"] for v in views])
    report = {
        "views": views,
        "medianMsMean": float(medians.mean()),
        "relativeStdOfMedians": float(medians.std() / medians.mean()),
        "warmup": warmup,
        "reps": reps,
    }
    return report


def write_bench_report(report, path):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)


def write_image(frame, path):
    """8-bit RGB PNG, row-major, top-left origin."""
    pixels = frame.rgb8 if isinstance(frame, Frame) else np.asarray(frame)
    Image.fromarray(pixels, mode="RGB").save(path, format="PNG")


def read_image(path):
    return np.asarray(Image.open(path).convert("RGB"))


def oracle_frame(scene, cam: Camera) -> Frame:
    """Analytic reference render of the scene from the same camera."""
    from .scenes import oracle_trace_batch

    dirs = cam.ray_directions()
    eye = np.broadcast_to(np.asarray(cam.eye, dtype=np.float64), dirs.shape)
    t, colors = oracle_trace_batch(scene, eye, dirs)
    status = np.where(np.isfinite(t), HIT, MISS).astype(np.uint8)
    rgb = np.where(np.isfinite(t)[:, None], colors,
                   np.asarray(BACKGROUND)).astype(np.float32)
    return Frame(pixels=rgb.reshape(cam.height, cam.width, 3),
                 status=status.reshape(cam.height, cam.width),
                 stats={})
