"""Bake point clouds into per-probe octahedral map chains and (de)serialize
them.

Per texel the bake keeps the point with the smallest distance to the probe;
the low-resolution distance map is a blockwise MIN so that hierarchical
tracing can never skip past a surface.

Texel storage (also the file layout):
  irradiance  RGB565, 2 bytes    distance  float16, 2 bytes (EMPTY = +inf)
  direction   2x8-bit sub-texel offset of the point's own octahedral uv,
              2 bytes (decoded against the texel corner at load time)
Bakes quantize in memory too, so save -> load round trips bit-identically.
"""

from __future__ import annotations

import struct
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .octmap import MapChain, oct_decode, oct_encode, texel_center
from .pointcloud import PointCloud

MAGIC = b"LFPROBE1"
FMT_IRR_RGB565 = 1
FMT_DIST_F16 = 2
FMT_DIR_SUBTEXEL8 = 3

# magic + origin 3d + r_hi/r_lo + format codes + bounds 6d + point count
# + timestamp + source id
_HEADER = struct.Struct("<3dII3H2x6dQd64s")


class ProbeFormatError(Exception):
    pass


# points projected per bake chunk; bounds the bake's transient memory
_PROJECT_CHUNK = 1 << 22


@dataclass(frozen=True)
class ProbeData:
    """One probe: origin, five-map chain and bake metadata. Immutable."""

    origin: np.ndarray
    chain: MapChain
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    source: str = ""
    point_count: int = 0
    timestamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "origin",
                           np.asarray(self.origin, dtype=np.float64))


def quantize_rgb565(colors):
    """Snap float colors in [0,1] to the RGB565 grid (still float32)."""
    c = np.clip(np.asarray(colors, dtype=np.float64), 0.0, 1.0)
    r = np.rint(c[..., 0] * 31.0) / 31.0
    g = np.rint(c[..., 1] * 63.0) / 63.0
    b = np.rint(c[..., 2] * 31.0) / 31.0
    return np.stack([r, g, b], axis=-1).astype(np.float32)


def quantize_distance(d):
    """Snap distances to float16-representable values (kept as float32)."""
    return np.asarray(d, dtype=np.float16).astype(np.float32)


def _quantize_direction(uv, tx, ty, resolution):
    """Quantize per-point octahedral uv to an 8-bit offset inside its texel;
    returns (byte offsets (N,2), decoded float32 directions (N,3))."""
    fx = uv[:, 0] * resolution - tx
    fy = uv[:, 1] * resolution - ty
    qx = np.clip(np.rint(fx * 254.0), 0, 254).astype(np.uint8)
    qy = np.clip(np.rint(fy * 254.0), 0, 254).astype(np.uint8)
    dec = _decode_direction(qx, qy, tx, ty, resolution)
    return np.stack([qx, qy], axis=-1), dec


def _decode_direction(qx, qy, tx, ty, resolution):
    # q/254 so that q=127 is the exact texel center
    u = (tx + qx.astype(np.float64) / 254.0) / resolution
    v = (ty + qy.astype(np.float64) / 254.0) / resolution
    return oct_decode(np.stack([u, v], axis=-1)).astype(np.float32)


def derive_low_res(distance_hi, factor):
    """Blockwise-MIN downsample of a distance map; EMPTY (+inf) texels are
    ignored and an all-EMPTY block stays EMPTY."""
    r_hi = distance_hi.shape[0]
    if r_hi % factor != 0:
        raise ValueError("factor must divide the high resolution")
    r_lo = r_hi // factor
    blocks = distance_hi.reshape(r_lo, factor, r_lo, factor)
    return blocks.min(axis=(1, 3))


def _low_res_directions(r_lo):
    ty, tx = np.mgrid[0:r_lo, 0:r_lo]
    centers = texel_center(tx, ty, r_lo)
    return oct_decode(centers).astype(np.float32)


def texel_center_directions(resolution):
    """Decoded unit direction of every texel center, shape (R, R, 3)."""
    return _low_res_directions(resolution)


def _select_min_per_texel(flat, dist, positions, colors):
    """Winner point index per occupied texel: minimum distance, ties broken
    by position then color so the result is independent of point order."""
    order = np.lexsort((dist, flat))
    flat_sorted = flat[order]
    uniq, first = np.unique(flat_sorted, return_index=True)
    winners = order[first]

    # Resolve exact distance ties deterministically.
    win_dist = np.full(flat.max() + 1, np.inf)
    win_dist[uniq] = dist[winners]
    tied = np.flatnonzero(dist == win_dist[flat])
    if len(tied) > len(uniq):
        sub = tied
        keys = (colors[sub, 2], colors[sub, 1], colors[sub, 0],
                positions[sub, 2], positions[sub, 1], positions[sub, 0],
                flat[sub])
        sorder = np.lexsort(keys)
        sflat = flat[sub][sorder]
        _, sfirst = np.unique(sflat, return_index=True)
        winners = sub[sorder[sfirst]]
    return uniq, winners


def bake_probe(cloud: PointCloud, origin, r_hi=2048, r_lo=128,
               source="") -> ProbeData:
    """Project every cloud point into the probe's octahedral maps.

    Points closer than 1e-6 m to the origin are skipped with a warning.
    """
    if r_hi % r_lo != 0:
        raise ValueError("r_hi must be a multiple of r_lo")
    origin = np.asarray(origin, dtype=np.float64)
    pos = cloud.positions
    n = len(pos)
    if n == 0:
        raise ValueError("no usable points for bake")

    # Project chunkwise so the per-point temporaries (offsets, directions,
    # octahedral uv) never exist for the whole cloud at once; only the
    # distance and flat texel index survive per point.
    dist = np.empty(n, dtype=np.float64)
    flat = np.empty(n, dtype=np.int64)
    for start in range(0, n, _PROJECT_CHUNK):
        sl = slice(start, min(start + _PROJECT_CHUNK, n))
        w = pos[sl] - origin
        d = np.linalg.norm(w, axis=1)
        dist[sl] = d
        bad = d < 1e-6
        if bad.any():
            # placeholder direction; these points are dropped below
            w = np.where(bad[:, None], (0.0, 1.0, 0.0), w)
        uv = oct_encode(w / np.where(bad, 1.0, d)[:, None])
        tx = np.minimum((uv[:, 0] * r_hi).astype(np.int64), r_hi - 1)
        ty = np.minimum((uv[:, 1] * r_hi).astype(np.int64), r_hi - 1)
        flat[sl] = np.where(bad, -1, ty * r_hi + tx)

    keep = flat >= 0
    n_skipped = n - int(keep.sum())
    if n_skipped:
        print(f"bake_probe: skipped {n_skipped} points coincident with the "
              f"probe origin", file=sys.stderr)
        pos = pos[keep]
        dist = dist[keep]
        flat = flat[keep]
    if len(dist) == 0:
        raise ValueError("no usable points for bake")
    colors = cloud.colors[keep] if n_skipped else cloud.colors

    uniq, winners = _select_min_per_texel(flat, dist, pos, colors)

    wtx = flat[winners] % r_hi
    wty = flat[winners] // r_hi
    irr = np.zeros((r_hi, r_hi, 3), dtype=np.float32)
    distance_hi = np.full((r_hi, r_hi), np.inf, dtype=np.float32)
    direction_hi = np.zeros((r_hi, r_hi, 3), dtype=np.float32)

    irr[wty, wtx] = quantize_rgb565(colors[winners])
    distance_hi[wty, wtx] = quantize_distance(dist[winners])
    wvec = pos[winners] - origin
    wuv = oct_encode(wvec / np.linalg.norm(wvec, axis=1)[:, None])
    _, dec_dir = _quantize_direction(wuv, wtx, wty, r_hi)
    direction_hi[wty, wtx] = dec_dir

    distance_lo = derive_low_res(distance_hi, r_hi // r_lo)
    chain = MapChain(irradiance_hi=irr, distance_hi=distance_hi,
                     direction_hi=direction_hi, distance_lo=distance_lo,
                     direction_lo=_low_res_directions(r_lo))
    lo, hi = cloud.bounds
    return ProbeData(origin=origin, chain=chain, bounds_lo=lo, bounds_hi=hi,
                     source=source, point_count=len(cloud),
                     timestamp=time.time())


def simulate_probe(cloud: PointCloud, origin, r_hi=2048, r_lo=128,
                   source="") -> ProbeData:
    """Bake a probe at an arbitrary location of the unified cloud.

    This is the whole simulated-probe mechanism: the unified cloud permits
    baking anywhere offline. Warns when the origin is outside the cloud
    bounds.
    """
    origin = np.asarray(origin, dtype=np.float64)
    lo, hi = cloud.bounds
    if np.any(origin < lo) or np.any(origin > hi):
        print(f"simulate_probe: origin {origin.tolist()} is outside the "
              f"cloud bounds", file=sys.stderr)
    return bake_probe(cloud, origin, r_hi=r_hi, r_lo=r_lo, source=source)


# --- serialization ---------------------------------------------------------

def _pack_irradiance(irr):
    r = np.rint(irr[..., 0] * 31.0).astype(np.uint16)
    g = np.rint(irr[..., 1] * 63.0).astype(np.uint16)
    b = np.rint(irr[..., 2] * 31.0).astype(np.uint16)
    packed = (r << 11) | (g << 5) | b
    return packed.astype("<u2").tobytes()

def _unpack_irradiance(buf, res):
    packed = np.frombuffer(buf, dtype="<u2").reshape(res, res)
    r = ((packed >> 11) & 0x1F).astype(np.float32) / 31.0
    g = ((packed >> 5) & 0x3F).astype(np.float32) / 63.0
    b = (packed & 0x1F).astype(np.float32) / 31.0
    return np.stack([r, g, b], axis=-1)

def _pack_distance(d):
    return d.astype("<f2").tobytes()

def _unpack_distance(buf, res):
    return np.frombuffer(buf, dtype="<f2").reshape(res, res).astype(np.float32)

def _pack_direction(direction, distance, res):
    """Re-encode stored directions to their 8-bit sub-texel offsets."""
    mask = np.isfinite(distance)
    out = np.zeros((res, res, 2), dtype=np.uint8)
    if mask.any():
        dirs = direction[mask].astype(np.float64)
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        uv = oct_encode(dirs)
        ty, tx = np.nonzero(mask)
        fx = np.clip(uv[:, 0] * res - tx, 0.0, 1.0)
        fy = np.clip(uv[:, 1] * res - ty, 0.0, 1.0)
        out[mask, 0] = np.clip(np.rint(fx * 254.0), 0, 254).astype(np.uint8)
        out[mask, 1] = np.clip(np.rint(fy * 254.0), 0, 254).astype(np.uint8)
    return out.tobytes()

def _unpack_direction(buf, res, distance):
    q = np.frombuffer(buf, dtype=np.uint8).reshape(res, res, 2)
    ty, tx = np.mgrid[0:res, 0:res]
    out = _decode_direction(q[..., 0].ravel(), q[..., 1].ravel(),
                            tx.ravel(), ty.ravel(), res).reshape(res, res, 3)
    out[~np.isfinite(distance)] = 0.0
    return out


def computed_file_size(r_hi, r_lo):
    """Size in bytes of a probe file under the documented layout."""
    per_hi = 2 + 2 + 2   # irradiance + distance + direction
    per_lo = 2 + 2       # distance + direction
    return len(MAGIC) + _HEADER.size + r_hi * r_hi * per_hi + r_lo * r_lo * per_lo


def save_probe(probe: ProbeData, path):
    c = probe.chain
    r_hi, r_lo = c.res_hi, c.res_lo
    header = _HEADER.pack(
        *probe.origin,
        r_hi, r_lo,
        FMT_IRR_RGB565, FMT_DIST_F16, FMT_DIR_SUBTEXEL8,
        *probe.bounds_lo, *probe.bounds_hi,
        probe.point_count, probe.timestamp,
        probe.source.encode("utf-8")[:64],
    )
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(_pack_irradiance(c.irradiance_hi))
        fh.write(_pack_distance(c.distance_hi))
        fh.write(_pack_direction(c.direction_hi, c.distance_hi, r_hi))
        fh.write(_pack_distance(c.distance_lo))
        fh.write(_pack_direction(c.direction_lo,
                                 np.zeros((r_lo, r_lo), np.float32), r_lo))


def load_probe(path) -> ProbeData:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:len(MAGIC)] != MAGIC:
        raise ProbeFormatError(f"{path}: bad magic, not a probe file")
    off = len(MAGIC)
    try:
        fields = _HEADER.unpack_from(data, off)
    except struct.error:
        raise ProbeFormatError(f"{path}: truncated header") from None
    off += _HEADER.size
    ox, oy, oz, r_hi, r_lo, f_irr, f_dist, f_dir = fields[:8]
    if (f_irr, f_dist, f_dir) != (FMT_IRR_RGB565, FMT_DIST_F16,
                                  FMT_DIR_SUBTEXEL8):
        raise ProbeFormatError(f"{path}: unsupported payload format codes "
                               f"{(f_irr, f_dist, f_dir)}")
    expected = computed_file_size(r_hi, r_lo)
    if len(data) != expected:
        raise ProbeFormatError(
            f"{path}: expected {expected} bytes, got {len(data)}")
    b_lo = np.array(fields[8:11])
    b_hi = np.array(fields[11:14])
    point_count, timestamp = fields[14], fields[15]
    source = fields[16].rstrip(b"\x00").decode("utf-8")

    n_hi = r_hi * r_hi
    n_lo = r_lo * r_lo
    irr = _unpack_irradiance(data[off:off + 2 * n_hi], r_hi); off += 2 * n_hi
    dist_hi = _unpack_distance(data[off:off + 2 * n_hi], r_hi); off += 2 * n_hi
    dir_hi = _unpack_direction(data[off:off + 2 * n_hi], r_hi, dist_hi)
    off += 2 * n_hi
    dist_lo = _unpack_distance(data[off:off + 2 * n_lo], r_lo); off += 2 * n_lo
    dir_lo = _unpack_direction(data[off:off + 2 * n_lo], r_lo,
                               np.zeros((r_lo, r_lo), np.float32))
    irr[~np.isfinite(dist_hi)] = 0.0
    chain = MapChain(irradiance_hi=irr, distance_hi=dist_hi,
                     direction_hi=dir_hi, distance_lo=dist_lo,
                     direction_lo=dir_lo)
    return ProbeData(origin=np.array([ox, oy, oz]), chain=chain,
                     bounds_lo=b_lo, bounds_hi=b_hi, source=source,
                     point_count=point_count, timestamp=timestamp)
