"""Octahedral direction <-> texel mathematics and the per-probe map chain.

Convention: +Y maps to the center of the square, the (x, z) plane forms the
equatorial diamond, and the lower hemisphere (y < 0) is folded into the four
corners with sign(0) = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Distance value stored in texels that no point was projected into.
EMPTY_DISTANCE = np.inf

UNIT_TOL = 1e-6


def _sign_not_zero(v):
    return np.where(v >= 0.0, 1.0, -1.0)


def oct_encode(d):
    """Map unit direction(s) (..., 3) to octahedral uv in [0, 1]^2.

    Raises ValueError for non-unit input (tolerance 1e-6).
    """
    d = np.asarray(d, dtype=np.float64)
    norm = np.sqrt(np.sum(d * d, axis=-1))
    if np.any(np.abs(norm - 1.0) > UNIT_TOL):
        raise ValueError("oct_encode requires unit directions")
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    l1 = np.abs(x) + np.abs(y) + np.abs(z)
    px = x / l1
    pz = z / l1
    fold = y < 0.0
    fx = _sign_not_zero(px) * (1.0 - np.abs(pz))
    fz = _sign_not_zero(pz) * (1.0 - np.abs(px))
    px = np.where(fold, fx, px)
    pz = np.where(fold, fz, pz)
    uv = np.stack([px, pz], axis=-1) * 0.5 + 0.5
    return uv


def oct_decode(uv):
    """Inverse of oct_encode: uv in [0, 1]^2 to unit direction(s).

    Raises ValueError for uv outside [0, 1].
    """
    uv = np.asarray(uv, dtype=np.float64)
    if np.any(uv < 0.0) or np.any(uv > 1.0):
        raise ValueError("oct_decode requires uv in [0, 1]")
    fx = uv[..., 0] * 2.0 - 1.0
    fz = uv[..., 1] * 2.0 - 1.0
    y = 1.0 - np.abs(fx) - np.abs(fz)
    fold = y < 0.0
    ux = _sign_not_zero(fx) * (1.0 - np.abs(fz))
    uz = _sign_not_zero(fz) * (1.0 - np.abs(fx))
    x = np.where(fold, ux, fx)
    z = np.where(fold, uz, fz)
    d = np.stack([x, y, z], axis=-1)
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    return d


def texel_index(uv, resolution):
    """Nearest-texel indices (tx, ty) for uv; out-of-range uv is clamped."""
    uv = np.asarray(uv, dtype=np.float64)
    idx = np.floor(uv * resolution).astype(np.int64)
    np.clip(idx, 0, resolution - 1, out=idx)
    return idx[..., 0], idx[..., 1]


def texel_center(tx, ty, resolution):
    """uv of the center of texel (tx, ty)."""
    tx = np.asarray(tx, dtype=np.float64)
    ty = np.asarray(ty, dtype=np.float64)
    return np.stack([(tx + 0.5) / resolution, (ty + 0.5) / resolution], axis=-1)


def texel_fetch(map_array, uv):
    """Nearest-neighbor payload lookup. Maps are indexed [ty, tx].

    No filtering: distance and direction payloads must not be interpolated
    across depth discontinuities. EMPTY propagates unchanged.
    """
    resolution = map_array.shape[0]
    tx, ty = texel_index(uv, resolution)
    return map_array[ty, tx]


@dataclass(frozen=True)
class MapChain:
    """The five octahedral maps of one probe.

    High resolution: irradiance (R, R, 3), radial distance (R, R) and
    incoming-point direction (R, R, 3); low resolution: distance and
    direction only. Distance EMPTY texels hold +inf, direction EMPTY texels
    are zero. All arrays are float32, indexed [ty, tx].
    """

    irradiance_hi: np.ndarray
    distance_hi: np.ndarray
    direction_hi: np.ndarray
    distance_lo: np.ndarray
    direction_lo: np.ndarray

    def __post_init__(self):
        r_hi = self.res_hi
        r_lo = self.res_lo
        if r_hi % r_lo != 0:
            raise ValueError("high resolution must be a multiple of low resolution")
        for arr in (self.irradiance_hi, self.distance_hi, self.direction_hi,
                    self.distance_lo, self.direction_lo):
            if arr.shape[0] != arr.shape[1]:
                raise ValueError("octahedral maps must be square")

    @property
    def res_hi(self) -> int:
        return self.distance_hi.shape[0]

    @property
    def res_lo(self) -> int:
        return self.distance_lo.shape[0]

    @property
    def factor(self) -> int:
        return self.res_hi // self.res_lo
