"""Colored point cloud container and .xyz text ingestion.

The .xyz format is one point per line: "x y z r g b". Colors are either
0-255 integers or 0-1 reals; any color value > 1 switches the whole file to
the 0-255 interpretation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PointCloudError(Exception):
    pass


@dataclass(frozen=True)
class PointCloud:
    """Unified colored points in world space; immutable after construction.

    positions: (N, 3) float64 meters; colors: (N, 3) float32 in [0, 1].
    """

    positions: np.ndarray
    colors: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        col = np.asarray(self.colors, dtype=np.float32)
        if pos.ndim != 2 or pos.shape[1] != 3 or col.shape != pos.shape:
            raise PointCloudError("positions and colors must both be (N, 3)")
        if pos.shape[0] == 0:
            raise PointCloudError("empty point cloud")
        if not np.all(np.isfinite(pos)):
            raise PointCloudError("non-finite point positions")
        pos.setflags(write=False)
        col.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "colors", col)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def bounds(self):
        return self.positions.min(axis=0), self.positions.max(axis=0)


def load_xyz(path):
    """Parse an .xyz file into a PointCloud.

    Malformed lines are counted and reported on stderr; more than 1% of
    malformed lines is a hard error listing their line numbers.
    """
    rows = []
    bad_lines = []
    n_lines = 0
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            n_lines += 1
            parts = line.split()
            if len(parts) != 6:
                bad_lines.append(lineno)
                continue
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                bad_lines.append(lineno)
    if n_lines == 0 or not rows and not bad_lines:
        raise PointCloudError(f"{path}: empty point cloud")
    if bad_lines and len(bad_lines) > 0.01 * n_lines:
        shown = ", ".join(map(str, bad_lines[:20]))
        raise PointCloudError(
            f"{path}: {len(bad_lines)} of {n_lines} lines malformed "
            f"(lines {shown}{'...' if len(bad_lines) > 20 else ''})")
    if bad_lines:
        import sys
        print(f"{path}: skipped {len(bad_lines)} malformed lines",
              file=sys.stderr)
    if not rows:
        raise PointCloudError(f"{path}: empty point cloud")
    data = np.asarray(rows, dtype=np.float64)
    colors = data[:, 3:6]
    if np.any(colors > 1.0):  # 0-255 scale
        colors = colors / 255.0
    return PointCloud(data[:, 0:3], np.clip(colors, 0.0, 1.0))


def save_xyz(cloud, path):
    """Write an .xyz file with 0-255 integer colors.

    Round trips through load_xyz preserve positions to 1e-6 and colors to
    1/255.
    """
    rgb = np.rint(np.asarray(cloud.colors, dtype=np.float64) * 255.0)
    rgb = np.clip(rgb, 0, 255).astype(np.int64)
    with open(path, "w") as fh:
        for (x, y, z), (r, g, b) in zip(cloud.positions, rgb):
            fh.write(f"{x:.6f} {y:.6f} {z:.6f} {r} {g} {b}\n")
