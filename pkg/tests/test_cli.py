import json

import numpy as np
import pytest
from click.testing import CliRunner

from lfprobe.bake import load_probe
from lfprobe.cli import main
from lfprobe.grid import bake_grid, save_grid
from lfprobe.pointcloud import save_xyz
from lfprobe.render import read_image
from lfprobe.scenes import room_center


@pytest.fixture(scope="module")
def workdir(cloud, tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    save_xyz(cloud, base / "cloud.xyz")
    grid = bake_grid(cloud, (0.5, 0.25, 0.5), 2.0, (2, 2, 2),
                     r_hi=64, r_lo=16)
    save_grid(grid, base / "grid")
    return base


def run(*args):
    result = CliRunner().invoke(main, [str(a) for a in args])
    if result.exit_code != 0 and result.exception:
        raise result.exception
    return result


class TestBakeCommand:
    def test_bake_writes_probe(self, workdir):
        out = workdir / "p.lfp"
        result = run("bake", "--cloud", workdir / "cloud.xyz",
                     "--origin", "1.5,1.25,3.0", "--hi", 64, "--lo", 16,
                     "--out", out)
        assert result.exit_code == 0
        probe = load_probe(out)
        assert np.allclose(probe.origin, room_center())
        assert probe.chain.res_hi == 64

    def test_simulate_probe_same_flags(self, workdir):
        out = workdir / "sim.lfp"
        result = run("simulate-probe", "--cloud", workdir / "cloud.xyz",
                     "--origin", "1.0,1.0,2.0", "--hi", 32, "--lo", 8,
                     "--out", out)
        assert result.exit_code == 0
        assert load_probe(out).chain.res_hi == 32

    def test_bad_origin_rejected(self, workdir):
        result = CliRunner().invoke(main, [
            "bake", "--cloud", str(workdir / "cloud.xyz"),
            "--origin", "1,2", "--out", str(workdir / "x.lfp")])
        assert result.exit_code != 0
        assert "x,y,z" in result.output


class TestRenderCommand:
    def test_render_probe(self, workdir):
        run("bake", "--cloud", workdir / "cloud.xyz",
            "--origin", "1.5,1.25,3.0", "--hi", 64, "--lo", 16,
            "--out", workdir / "p.lfp")
        out = workdir / "f.png"
        result = run("render", "--probe", workdir / "p.lfp",
                     "--eye", "1.5,1.25,3.0", "--look", "1.5,1.25,4.0",
                     "--size", "32x32", "--out", out)
        assert result.exit_code == 0
        assert read_image(out).shape == (32, 32, 3)

    def test_render_grid(self, workdir):
        out = workdir / "g.png"
        result = run("render", "--grid", workdir / "grid" / "grid.json",
                     "--eye", "1.5,1.25,1.5", "--look", "1.5,0.0,1.5",
                     "--size", "16x24", "--out", out)
        assert result.exit_code == 0
        assert read_image(out).shape == (24, 16, 3)

    def test_requires_exactly_one_source(self, workdir):
        result = CliRunner().invoke(main, [
            "render", "--eye", "0,0,0", "--look", "0,0,1",
            "--out", str(workdir / "n.png")])
        assert result.exit_code != 0

    def test_bad_size_rejected(self, workdir):
        result = CliRunner().invoke(main, [
            "render", "--probe", str(workdir / "p.lfp"),
            "--eye", "0,0,0", "--look", "0,0,1", "--size", "banana",
            "--out", str(workdir / "n.png")])
        assert result.exit_code != 0
        assert "WxH" in result.output


class TestBenchCommand:
    def test_bench_report(self, workdir):
        views = workdir / "views.json"
        views.write_text(json.dumps([
            {"eye": [1.5, 1.25, 1.5], "look": [1.5, 0.25, 1.5],
             "width": 16, "height": 16},
            {"eye": [1.5, 1.25, 1.5], "look": [0.5, 1.25, 1.5],
             "width": 16, "height": 16},
        ]))
        report = workdir / "report.json"
        result = run("bench", "--grid", workdir / "grid" / "grid.json",
                     "--views", views, "--reps", 2, "--warmup", 1,
                     "--report", report)
        assert result.exit_code == 0
        data = json.loads(report.read_text())
        assert len(data["views"]) == 2
        assert data["reps"] == 2
