"""Command line front end: baking, rendering, benchmarking, serving."""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from .bake import bake_probe, load_probe, save_probe, simulate_probe
from .grid import load_grid
from .pointcloud import load_xyz
from .render import (Camera, bench_views, render_frame, write_bench_report,
                     write_image)


def _parse_vec3(_ctx, _param, value):
    if value is None:
        return None
    parts = value.split(",")
    if len(parts) != 3:
        raise click.BadParameter("expected x,y,z")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise click.BadParameter("expected numeric x,y,z") from None


def _parse_size(_ctx, _param, value):
    try:
        w, h = value.lower().split("x")
        w, h = int(w), int(h)
    except ValueError:
        raise click.BadParameter("expected WxH, e.g. 512x512") from None
    if w < 1 or h < 1:
        raise click.BadParameter("size must be positive")
    return w, h


@click.group()
def main():
    """Light-field-probe scene reconstruction tools."""


def _bake_options(fn):
    for deco in (
        click.option("--cloud", required=True,
                     type=click.Path(exists=True, dir_okay=False),
                     help="input point cloud (.xyz)"),
        click.option("--origin", required=True, callback=_parse_vec3,
                     help="probe position as x,y,z"),
        click.option("--hi", default=2048, show_default=True,
                     help="high-res map resolution"),
        click.option("--lo", default=128, show_default=True,
                     help="low-res map resolution"),
        click.option("--out", required=True, type=click.Path(dir_okay=False),
                     help="output probe file"),
    ):
        fn = deco(fn)
    return fn


@main.command()
@_bake_options
def bake(cloud, origin, hi, lo, out):
    """Bake one probe from a point cloud captured at the probe position."""
    pc = load_xyz(cloud)
    probe = bake_probe(pc, origin, r_hi=hi, r_lo=lo, source=cloud)
    save_probe(probe, out)
    click.echo(f"baked {pc.positions.shape[0]} points -> {out}")


@main.command("simulate-probe")
@_bake_options
def simulate(cloud, origin, hi, lo, out):
    """Bake a probe anywhere inside a unified point cloud."""
    pc = load_xyz(cloud)
    probe = simulate_probe(pc, origin, r_hi=hi, r_lo=lo, source=cloud)
    save_probe(probe, out)
    click.echo(f"simulated probe at {origin} -> {out}")


def _load_source(probe, grid):
    if (probe is None) == (grid is None):
        raise click.UsageError("give exactly one of --probe or --grid")
    return load_probe(probe) if probe else load_grid(grid)


def _camera(eye, look, fov, size):
    forward = np.asarray(look) - np.asarray(eye)
    n = np.linalg.norm(forward)
    if n < 1e-9:
        raise click.BadParameter("--look must differ from --eye")
    return Camera(eye=eye, forward=tuple(forward / n), vfov_deg=fov,
                  width=size[0], height=size[1])


@main.command()
@click.option("--probe", type=click.Path(exists=True, dir_okay=False),
              help="single probe file")
@click.option("--grid", type=click.Path(exists=True, dir_okay=False),
              help="probe grid manifest")
@click.option("--eye", required=True, callback=_parse_vec3)
@click.option("--look", required=True, callback=_parse_vec3,
              help="point the camera looks at")
@click.option("--fov", default=60.0, show_default=True,
              help="vertical field of view in degrees")
@click.option("--size", default="512x512", show_default=True,
              callback=_parse_size, help="image size WxH")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def render(probe, grid, eye, look, fov, size, out):
    """Render one frame from a probe or a probe grid."""
    source = _load_source(probe, grid)
    frame = render_frame(source, _camera(eye, look, fov, size))
    write_image(frame, out)
    s = frame.stats
    click.echo(f"wrote {out}  trace {s['traceMs']:.1f} ms  "
               f"miss {s['missFraction']:.3f}  "
               f"unknown {s['unknownFraction']:.3f}")


@main.command()
@click.option("--grid", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--views", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON list of {eye, look, fov?, width?, height?}")
@click.option("--reps", default=50, show_default=True)
@click.option("--warmup", default=3, show_default=True)
@click.option("--report", required=True, type=click.Path(dir_okay=False))
def bench(grid, views, reps, warmup, report):
    """Benchmark frame times over a set of views."""
    source = load_grid(grid)
    with open(views) as fh:
        specs = json.load(fh)
    cams = []
    for spec in specs:
        size = (spec.get("width", 512), spec.get("height", 512))
        cams.append(_camera(tuple(spec["eye"]), tuple(spec["look"]),
                            spec.get("fov", 60.0), size))
    result = bench_views(source, cams, warmup=warmup, reps=reps)
    write_bench_report(result, report)
    click.echo(f"median {result['medianMsMean']:.2f} ms, relative std "
               f"{result['relativeStdOfMedians']:.3f} -> {report}")


@main.command()
@click.option("--config", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON config listing scene manifests")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int,
              help="port (default: LFPROBE_PORT env or 8000)")
def serve(config, host, port):
    """Run the render service."""
    from . import service

    try:
        service.run(config, host=host, port=port)
    except service.ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
