"""Analytic test scenes: boxes and spheres with exact ray intersection.

These scenes double as ground truth: sample_point_cloud turns them into
colored point clouds for baking, oracle_trace answers the same ray queries
exactly, so renders can be checked against an independent closed-form path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-9

# Colors exactly representable in RGB565 (and therefore also in RGB888),
# so probe irradiance storage quantizes them losslessly.
PALETTE = {
    "red": (1.0, 0.0, 0.0),
    "green": (0.0, 1.0, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "yellow": (1.0, 1.0, 0.0),
    "cyan": (0.0, 1.0, 1.0),
    "magenta": (1.0, 0.0, 1.0),
    "white": (1.0, 1.0, 1.0),
    "gray": (16 / 31, 32 / 63, 16 / 31),
    "orange": (1.0, 32 / 63, 0.0),
    "teal": (0.0, 32 / 63, 16 / 31),
}


@dataclass(frozen=True)
class Checker:
    """Two-tone checker pattern keyed on integer cells of size `scale`."""

    color_a: tuple
    color_b: tuple
    scale: float = 0.5


@dataclass(frozen=True)
class Box:
    """Axis-aligned box. Color is a solid tuple, a Checker, or per-face
    colors keyed -x,+x,-y,+y,-z,+z (applied to whichever face is hit)."""

    lo: tuple
    hi: tuple
    color: object = PALETTE["white"]
    face_colors: tuple | None = None  # 6 colors: (-x, +x, -y, +y, -z, +z)

    def __post_init__(self):
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError("box must have positive extent")

    @property
    def area(self) -> float:
        dx, dy, dz = (h - l for l, h in zip(self.lo, self.hi))
        return 2.0 * (dx * dy + dy * dz + dz * dx)


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float
    color: object = PALETTE["white"]

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("sphere must have positive radius")

    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.radius ** 2


@dataclass(frozen=True)
class AnalyticScene:
    primitives: tuple = field(default_factory=tuple)

    @property
    def bounds(self):
        los, his = [], []
        for p in self.primitives:
            if isinstance(p, Box):
                los.append(p.lo)
                his.append(p.hi)
            else:
                los.append(tuple(c - p.radius for c in p.center))
                his.append(tuple(c + p.radius for c in p.center))
        return np.min(los, axis=0), np.max(his, axis=0)


def _checker_colors(checker, points):
    cells = np.floor(points / checker.scale).astype(np.int64).sum(axis=-1)
    out = np.where((cells % 2 == 0)[..., None],
                   np.asarray(checker.color_a), np.asarray(checker.color_b))
    return out


def _box_face_id(box, points):
    """Index of the face (-x,+x,-y,+y,-z,+z) each surface point lies on."""
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    d = np.stack([np.abs(points[:, 0] - lo[0]), np.abs(points[:, 0] - hi[0]),
                  np.abs(points[:, 1] - lo[1]), np.abs(points[:, 1] - hi[1]),
                  np.abs(points[:, 2] - lo[2]), np.abs(points[:, 2] - hi[2])],
                 axis=-1)
    return np.argmin(d, axis=-1)


def _surface_colors(prim, points):
    points = np.atleast_2d(points)
    if isinstance(prim, Box) and prim.face_colors is not None:
        face = _box_face_id(prim, points)
        return np.asarray(prim.face_colors, dtype=np.float64)[face]
    if isinstance(prim.color, Checker):
        return _checker_colors(prim.color, points)
    return np.broadcast_to(np.asarray(prim.color, dtype=np.float64),
                           (points.shape[0], 3)).copy()


def _intersect_box(box, origins, directions):
    """Smallest t > eps where each ray crosses the box surface (inf = none).

    Rays starting inside the box hit the interior of the far face, which is
    what makes a room modeled as a single box work.
    """
    lo = np.asarray(box.lo, dtype=np.float64)
    hi = np.asarray(box.hi, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / directions
        t1 = (lo - origins) * inv
        t2 = (hi - origins) * inv
    tmin = np.where(np.isnan(t1), -np.inf, np.minimum(t1, t2))
    tmax = np.where(np.isnan(t2), np.inf, np.maximum(t1, t2))
    # Parallel ray outside the slab never enters it.
    par = directions == 0.0
    outside = par & ((origins < lo) | (origins > hi))
    tmin = np.where(par, -np.inf, tmin)
    tmax = np.where(par, np.inf, tmax)
    t_near = tmin.max(axis=-1)
    t_far = tmax.min(axis=-1)
    t_far = np.where(outside.any(axis=-1), -np.inf, t_far)
    hit = t_near <= t_far
    t = np.where(t_near > _EPS, t_near, t_far)
    return np.where(hit & (t > _EPS), t, np.inf)


def _intersect_sphere(sphere, origins, directions):
    oc = origins - np.asarray(sphere.center, dtype=np.float64)
    b = np.sum(oc * directions, axis=-1)
    c = np.sum(oc * oc, axis=-1) - sphere.radius ** 2
    disc = b * b - c
    sq = np.sqrt(np.maximum(disc, 0.0))
    t0 = -b - sq
    t1 = -b + sq
    t = np.where(t0 > _EPS, t0, t1)
    return np.where((disc >= 0.0) & (t > _EPS), t, np.inf)


def oracle_trace_batch(scene, origins, directions):
    """Exact nearest intersection for N rays.

    Returns (t, colors): t is +inf for misses, colors are black there.
    Ties between primitives break toward the lower primitive index.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    n = origins.shape[0]
    best_t = np.full(n, np.inf)
    best_prim = np.full(n, -1, dtype=np.int64)
    for i, prim in enumerate(scene.primitives):
        if isinstance(prim, Box):
            t = _intersect_box(prim, origins, directions)
        else:
            t = _intersect_sphere(prim, origins, directions)
        closer = t < best_t  # strict: earlier primitive wins ties
        best_t = np.where(closer, t, best_t)
        best_prim = np.where(closer, i, best_prim)
    colors = np.zeros((n, 3))
    for i, prim in enumerate(scene.primitives):
        mask = best_prim == i
        if mask.any():
            pts = origins[mask] + best_t[mask, None] * directions[mask]
            colors[mask] = _surface_colors(prim, pts)
    return best_t, colors


def oracle_trace(scene, origin, direction):
    """Single-ray oracle: (hit distance | None, color)."""
    direction = np.asarray(direction, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-6:
        raise ValueError("oracle_trace requires a unit direction")
    t, colors = oracle_trace_batch(scene, [origin], [direction])
    if not np.isfinite(t[0]):
        return None, None
    return float(t[0]), tuple(colors[0])


def _sample_box(box, density, rng):
    lo = np.asarray(box.lo, dtype=np.float64)
    hi = np.asarray(box.hi, dtype=np.float64)
    ext = hi - lo
    pts = []
    for axis in range(3):
        u, v = (axis + 1) % 3, (axis + 2) % 3
        face_area = ext[u] * ext[v]
        for side in (0, 1):
            count = int(round(density * face_area))
            p = np.empty((count, 3))
            p[:, axis] = lo[axis] + side * ext[axis]
            p[:, u] = lo[u] + rng.random(count) * ext[u]
            p[:, v] = lo[v] + rng.random(count) * ext[v]
            pts.append(p)
    return np.concatenate(pts, axis=0)


def _sample_sphere(sphere, density, rng):
    count = int(round(density * sphere.area))
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return np.asarray(sphere.center) + sphere.radius * v


def sample_point_cloud(scene, density, seed=0):
    """Deterministic surface sampling of all primitives at ~density pts/m^2.

    Each primitive draws from its own seed stream, so sampling one primitive
    never perturbs another.
    """
    if density <= 0:
        raise ValueError("density must be positive")
    from .pointcloud import PointCloud

    all_pts, all_cols = [], []
    for i, prim in enumerate(scene.primitives):
        rng = np.random.default_rng([seed, i])
        if isinstance(prim, Box):
            pts = _sample_box(prim, density, rng)
        else:
            pts = _sample_sphere(prim, density, rng)
        all_pts.append(pts)
        all_cols.append(_surface_colors(prim, pts))
    positions = np.concatenate(all_pts, axis=0)
    colors = np.concatenate(all_cols, axis=0).astype(np.float32)
    return PointCloud(positions, colors)


# Default synthetic scene used throughout the tests: a 3 m x 6 m x 2.5 m
# room with distinctly colored walls and two interior boxes.
ROOM_SIZE = (3.0, 2.5, 6.0)  # x width, y height, z length


def room_scene(with_boxes=True):
    w, h, l = ROOM_SIZE
    P = PALETTE
    prims = [
        Box((0.0, 0.0, 0.0), (w, h, l),
            face_colors=(P["red"], P["green"], P["gray"], P["white"],
                         P["blue"], P["yellow"])),
    ]
    if with_boxes:
        prims.append(Box((0.4, 0.0, 1.0), (1.1, 0.9, 1.8), color=P["cyan"]))
        prims.append(Box((2.0, 0.0, 4.2), (2.7, 1.2, 5.0), color=P["magenta"]))
    return AnalyticScene(tuple(prims))


def room_center():
    w, h, l = ROOM_SIZE
    return np.array([w / 2, h / 2, l / 2])
