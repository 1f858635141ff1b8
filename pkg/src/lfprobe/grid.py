"""Multi-probe coverage: uniform probe grid, cube iterator and the
nearest-probe fallback loop."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bake import ProbeData, bake_probe, load_probe, save_probe
from .kernels import HIT, MISS, UNKNOWN
from .trace import (DEFAULT_CONFIG, Ray, TraceOutcome, _outcome,
                    trace_one_probe)


@dataclass
class ProbeSet:
    """Probes stacked into dense arrays for the numba kernels."""

    probes: list
    dist_hi: np.ndarray = field(init=False)
    dir_hi: np.ndarray = field(init=False)
    irr_hi: np.ndarray = field(init=False)
    dist_lo: np.ndarray = field(init=False)
    origins: np.ndarray = field(init=False)

    def __post_init__(self):
        chains = [p.chain for p in self.probes]
        res = {(c.res_hi, c.res_lo) for c in chains}
        if len(res) != 1:
            raise ValueError("all probes must share the same resolutions")
        self.dist_hi = np.stack([c.distance_hi for c in chains])
        self.dir_hi = np.stack([c.direction_hi for c in chains])
        self.irr_hi = np.stack([c.irradiance_hi for c in chains])
        self.dist_lo = np.stack([c.distance_lo for c in chains])
        self.origins = np.stack([p.origin for p in self.probes])

    @property
    def bounds(self):
        lo = np.min([p.bounds_lo for p in self.probes], axis=0)
        hi = np.max([p.bounds_hi for p in self.probes], axis=0)
        return lo, hi


class ProbeGrid:
    """Probes at the vertices of a uniform 3D lattice of cubes.

    Probe (i, j, k) sits at grid_origin + cell_size * (i, j, k); the dense
    probe list is ordered with i major: index = (i * ny + j) * nz + k.
    """

    def __init__(self, grid_origin, cell_size, dims, probes):
        self.grid_origin = np.asarray(grid_origin, dtype=np.float64)
        self.cell_size = float(cell_size)
        self.dims = tuple(int(d) for d in dims)
        nx, ny, nz = self.dims
        if nx < 1 or ny < 1 or nz < 1:
            raise ValueError("grid dims must be >= 1 per axis")
        if len(probes) != nx * ny * nz:
            raise ValueError("probe count does not match grid dims")
        self.probes = list(probes)
        for (i, j, k) in np.ndindex(nx, ny, nz):
            expect = self.grid_origin + self.cell_size * np.array([i, j, k])
            got = self.probe(i, j, k).origin
            if np.max(np.abs(got - expect)) > 1e-6:
                raise ValueError(f"probe ({i},{j},{k}) is off-lattice")
        self._set = None

    def probe(self, i, j, k) -> ProbeData:
        nx, ny, nz = self.dims
        return self.probes[(i * ny + j) * nz + k]

    @property
    def probe_set(self) -> ProbeSet:
        if self._set is None:
            self._set = ProbeSet(self.probes)
        return self._set

    @property
    def n_cubes(self):
        nx, ny, nz = self.dims
        return (max(nx - 1, 1), max(ny - 1, 1), max(nz - 1, 1))

    @property
    def bounds(self):
        return self.probe_set.bounds

    def cube_bounds(self, cube):
        lo = self.grid_origin + self.cell_size * np.asarray(cube, dtype=float)
        return lo, lo + self.cell_size


def bake_grid(cloud, grid_origin, cell_size, dims, r_hi=512, r_lo=64,
              source="") -> ProbeGrid:
    """Bake a probe at every vertex of the lattice from one unified cloud
    (each one a simulated probe: visibility is resolved by the bake)."""
    nx, ny, nz = dims
    probes = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                origin = (np.asarray(grid_origin, dtype=np.float64)
                          + cell_size * np.array([i, j, k], dtype=np.float64))
                probes.append(bake_probe(cloud, origin, r_hi=r_hi, r_lo=r_lo,
                                         source=source))
    return ProbeGrid(grid_origin, cell_size, dims, probes)


def grid_iterator(grid: ProbeGrid, ray: Ray):
    """Cubes crossed by the ray, in entry order (exact 3D DDA).

    Yields ((i, j, k), t_enter, t_exit); empty when the ray misses the
    lattice entirely.
    """
    cx, cy, cz = (d - 1 for d in grid.dims)
    if cx < 1 or cy < 1 or cz < 1:
        return
    o = ray.origin - grid.grid_origin
    d = ray.direction
    cell = grid.cell_size
    t_near, t_far = -np.inf, np.inf
    for axis in range(3):
        extent = [cx, cy, cz][axis] * cell
        if d[axis] == 0.0:
            if o[axis] < 0.0 or o[axis] > extent:
                return
        else:
            ta = (0.0 - o[axis]) / d[axis]
            tb = (extent - o[axis]) / d[axis]
            if ta > tb:
                ta, tb = tb, ta
            t_near = max(t_near, ta)
            t_far = min(t_far, tb)
    if t_far < t_near or t_far <= 0.0:
        return
    t_enter = max(t_near, 0.0)

    p = (o + (t_enter + 1e-9) * d) / cell
    idx = np.clip(np.floor(p).astype(int), 0, [cx - 1, cy - 1, cz - 1])
    i, j, k = idx
    step = np.where(d > 0, 1, -1)
    t_max = np.empty(3)
    t_delta = np.empty(3)
    for axis in range(3):
        if d[axis] != 0.0:
            nxt = (idx[axis] + (1 if d[axis] > 0 else 0)) * cell
            t_max[axis] = (nxt - o[axis]) / d[axis]
            t_delta[axis] = abs(cell / d[axis])
        else:
            t_max[axis] = np.inf
            t_delta[axis] = np.inf

    t_cur = t_enter
    lims = (cx, cy, cz)
    idx = [int(i), int(j), int(k)]
    while True:
        axis = int(np.argmin(t_max))
        t_exit = min(float(t_max[axis]), t_far)
        yield (tuple(idx), float(t_cur), float(t_exit))
        t_cur = float(t_max[axis])
        t_max[axis] += t_delta[axis]
        idx[axis] += int(step[axis])
        if idx[axis] < 0 or idx[axis] >= lims[axis] or t_cur >= t_far:
            return


def probe_order(grid: ProbeGrid, cube, ray: Ray):
    """The cube's 8 corner probe coordinates sorted by distance from the
    ray origin; exact ties keep (i, j, k) lexicographic order."""
    i, j, k = cube
    corners = [(i + di, j + dj, k + dk)
               for di in (0, 1) for dj in (0, 1) for dk in (0, 1)]
    def key(c):
        origin = grid.grid_origin + grid.cell_size * np.asarray(c, float)
        return (float(np.linalg.norm(origin - ray.origin)), c)
    return sorted(corners, key=key)


def trace_grid(grid: ProbeGrid, ray: Ray, config=DEFAULT_CONFIG,
               max_probes_per_cube=8, instrument=None):
    """Walk ray-crossed cubes; inside each, query the corner probes nearest
    the eye first, falling through on MISS or UNKNOWN. First HIT wins; the
    last UNKNOWN texel is reported for diagnostics otherwise.

    instrument, when given, is a list collecting (cube, probe_coord) per
    actual probe trace call.
    """
    last_unknown = None
    fetches = 0
    for cube, t_enter, t_exit in grid_iterator(grid, ray):
        for coord in probe_order(grid, cube, ray)[:max_probes_per_cube]:
            probe = grid.probe(*coord)
            if instrument is not None:
                instrument.append((cube, coord))
            out = trace_one_probe(probe, ray, t_range=(t_enter, t_exit),
                                  config=config)
            fetches += out.fetches
            if out.status == HIT:
                return TraceOutcome(status=HIT, texel=out.texel, uv=out.uv,
                                    irradiance=out.irradiance,
                                    fetches=fetches)
            if out.status == UNKNOWN:
                last_unknown = out
    if last_unknown is not None:
        return TraceOutcome(status=MISS, texel=last_unknown.texel,
                            uv=last_unknown.uv, fetches=fetches)
    return TraceOutcome(status=MISS, fetches=fetches)


def trace_few_probes(probes, ray: Ray, config=DEFAULT_CONFIG,
                     instrument=None):
    """1-to-7-probe fallback loop: nearest-to-eye probe first, MISS or
    UNKNOWN falls through, identical to the grid's inner loop but without
    cube restriction."""
    if not 1 <= len(probes) <= 7:
        raise ValueError("trace_few_probes expects 1..7 probes")
    ordered = sorted(range(len(probes)),
                     key=lambda i: (float(np.linalg.norm(
                         probes[i].origin - ray.origin)), i))
    last_unknown = None
    fetches = 0
    for i in ordered:
        if instrument is not None:
            instrument.append(i)
        out = trace_one_probe(probes[i], ray, config=config)
        fetches += out.fetches
        if out.status == HIT:
            return TraceOutcome(status=HIT, texel=out.texel, uv=out.uv,
                                irradiance=out.irradiance, fetches=fetches)
        if out.status == UNKNOWN:
            last_unknown = out
    if last_unknown is not None:
        return TraceOutcome(status=UNKNOWN, texel=last_unknown.texel,
                            uv=last_unknown.uv, fetches=fetches)
    return TraceOutcome(status=MISS, fetches=fetches)


# --- manifest --------------------------------------------------------------

def save_grid(grid: ProbeGrid, directory, name="grid"):
    """Write per-probe files plus a JSON manifest; returns manifest path."""
    os.makedirs(directory, exist_ok=True)
    nx, ny, nz = grid.dims
    paths = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                fname = f"probe_{i}_{j}_{k}.lfp"
                save_probe(grid.probe(i, j, k), os.path.join(directory, fname))
                paths.append(fname)
    lo, hi = grid.bounds
    manifest = {
        "gridOrigin": list(grid.grid_origin),
        "cellSize": grid.cell_size,
        "dims": list(grid.dims),
        "bounds": {"lo": list(map(float, lo)), "hi": list(map(float, hi))},
        "probes": paths,
    }
    path = os.path.join(directory, f"{name}.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def load_grid(manifest_path) -> ProbeGrid:
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = os.path.dirname(os.path.abspath(manifest_path))
    probes = [load_probe(os.path.join(base, p)) for p in manifest["probes"]]
    return ProbeGrid(manifest["gridOrigin"], manifest["cellSize"],
                     manifest["dims"], probes)
