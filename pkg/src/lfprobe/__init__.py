"""Light-field-probe scene reconstruction: bake point clouds into probe
textures, then answer eye rays with hierarchical octahedral-map marching."""

from .bake import (ProbeData, bake_probe, computed_file_size, load_probe,
                   save_probe, simulate_probe)
from .grid import (ProbeGrid, ProbeSet, bake_grid, load_grid, save_grid,
                   trace_few_probes, trace_grid)
from .kernels import HIT, MISS, UNKNOWN
from .octmap import EMPTY_DISTANCE, MapChain, oct_decode, oct_encode
from .pointcloud import PointCloud, load_xyz, save_xyz
from .render import Camera, Frame, bench_views, psnr, render_frame, write_image
from .trace import (Ray, TraceConfig, TraceOutcome, trace_one_probe,
                    trace_one_probe_brute)

__all__ = [
    "ProbeData", "bake_probe", "simulate_probe", "save_probe", "load_probe",
    "computed_file_size",
    "ProbeGrid", "ProbeSet", "bake_grid", "save_grid", "load_grid",
    "trace_grid", "trace_few_probes",
    "HIT", "MISS", "UNKNOWN",
    "EMPTY_DISTANCE", "MapChain", "oct_encode", "oct_decode",
    "PointCloud", "load_xyz", "save_xyz",
    "Camera", "Frame", "render_frame", "psnr", "bench_views", "write_image",
    "Ray", "TraceConfig", "TraceOutcome", "trace_one_probe",
    "trace_one_probe_brute",
]

__version__ = "0.1.0"
