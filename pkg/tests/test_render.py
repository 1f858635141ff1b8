import numpy as np
import pytest

from lfprobe.kernels import HIT, MISS, UNKNOWN
from lfprobe.octmap import oct_encode
from lfprobe.render import (Camera, Frame, bench_views, oracle_frame, psnr,
                            read_image, render_frame, write_image)
from lfprobe.scenes import room_center


class TestCamera:
    def test_basis_orthonormal(self):
        cam = Camera(eye=(0, 0, 0), forward=(1.0, 2.0, 3.0))
        r, u, f = cam.basis()
        for v in (r, u, f):
            assert np.linalg.norm(v) == pytest.approx(1.0)
        assert abs(r @ u) < 1e-12 and abs(r @ f) < 1e-12 and abs(u @ f) < 1e-9

    def test_center_pixel_ray_is_forward(self):
        cam = Camera(eye=(0, 0, 0), forward=(0.0, 0.0, 1.0),
                     width=33, height=33)
        dirs = cam.ray_directions().reshape(33, 33, 3)
        assert np.allclose(dirs[16, 16], [0, 0, 1], atol=1e-6)

    def test_straight_down_view_still_orthonormal(self):
        cam = Camera(eye=(0, 0, 0), forward=(0.0, -1.0, 0.0))
        r, u, f = cam.basis()
        assert abs(r @ u) < 1e-12 and abs(r @ f) < 1e-12 and abs(u @ f) < 1e-9
        assert np.allclose(f, [0, -1, 0])

    def test_directions_unit(self):
        cam = Camera(eye=(0, 0, 0), forward=(1.0, 0.2, -0.3), width=16,
                     height=8)
        dirs = cam.ray_directions()
        assert dirs.shape == (128, 3)
        assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)


class TestRenderFrame:
    def test_eye_aligned_equals_direct_lookup(self, probe):
        cam = Camera(eye=tuple(probe.origin), forward=(0, 0, 1),
                     width=64, height=64)
        frame = render_frame(probe, cam)
        res = probe.chain.res_hi
        uv = oct_encode(cam.ray_directions())
        tx = np.minimum((uv[:, 0] * res).astype(int), res - 1)
        ty = np.minimum((uv[:, 1] * res).astype(int), res - 1)
        direct = probe.chain.irradiance_hi[ty, tx].reshape(64, 64, 3)
        stored = probe.chain.distance_hi[ty, tx].reshape(64, 64)
        hit = np.isfinite(stored)
        assert np.array_equal(frame.pixels[hit], direct[hit])
        assert np.all(frame.status[hit] == HIT)
        assert np.all(frame.status[~hit] == MISS)
        assert frame.stats["perPixelTexelFetches"] == 1.0

    def test_miss_and_unknown_colors(self, probe):
        # camera outside the cloud bounds looking away: everything misses
        cam = Camera(eye=(50.0, 50.0, 50.0), forward=(1.0, 0.0, 0.0),
                     width=8, height=8)
        frame = render_frame(probe, cam)
        assert frame.stats["missFraction"] == 1.0
        assert np.all(frame.pixels == 0.0)

    def test_stats_fractions_sum(self, probe):
        cam = Camera(eye=tuple(room_center() + [0.3, 0.0, 0.0]),
                     forward=(0, 0, 1), width=32, height=32)
        frame = render_frame(probe, cam)
        s = frame.stats
        assert 0.0 <= s["missFraction"] + s["unknownFraction"] <= 1.0
        assert s["traceMs"] > 0.0

    def test_deterministic(self, probe):
        cam = Camera(eye=tuple(room_center() + [0.2, 0.1, 0.0]),
                     forward=(0.2, 0.0, 1.0), width=48, height=48)
        a = render_frame(probe, cam)
        b = render_frame(probe, cam)
        assert np.array_equal(a.pixels, b.pixels)
        assert np.array_equal(a.status, b.status)


class TestPsnr:
    def _frame(self, pixels):
        pixels = np.asarray(pixels, dtype=np.float32)
        return Frame(pixels=pixels,
                     status=np.zeros(pixels.shape[:2], np.uint8))

    def test_identical_is_infinite(self):
        f = self._frame(np.random.default_rng(0).random((4, 4, 3)))
        assert psnr(f, f) == np.inf

    def test_one_pixel_off_closed_form(self):
        a = self._frame(np.zeros((2, 2, 3)))
        b = np.zeros((2, 2, 3))
        b[0, 0, 0] = 1.0
        assert psnr(a, self._frame(b)) == pytest.approx(
            10 * np.log10(12), abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            psnr(self._frame(np.zeros((2, 2, 3))),
                 self._frame(np.zeros((3, 3, 3))))

    def test_probe_render_vs_oracle_finite(self, probe, scene):
        cam = Camera(eye=tuple(room_center()), forward=(0, 0, 1),
                     width=64, height=64)
        value = psnr(render_frame(probe, cam), oracle_frame(scene, cam))
        assert np.isfinite(value) and value > 5.0


class TestBenchViews:
    def test_report_shape(self, probe):
        cams = [Camera(eye=tuple(probe.origin), forward=f, width=32,
                       height=32)
                for f in ((0, 0, 1), (1, 0, 0))]
        report = bench_views(probe, cams, warmup=1, reps=3)
        assert len(report["views"]) == 2
        assert report["relativeStdOfMedians"] >= 0.0
        assert all(v["medianMs"] > 0 for v in report["views"])

    def test_same_view_small_spread(self, probe):
        cam = Camera(eye=tuple(probe.origin), forward=(0, 0, 1), width=64,
                     height=64)
        report = bench_views(probe, [cam, cam, cam], warmup=2, reps=15)
        assert report["relativeStdOfMedians"] < 0.5


class TestWriteImage:
    def test_one_pixel_red_round_trip(self, tmp_path):
        frame = Frame(pixels=np.array([[[1.0, 0.0, 0.0]]], np.float32),
                      status=np.array([[HIT]], np.uint8))
        path = tmp_path / "red.png"
        write_image(frame, path)
        back = read_image(path)
        assert back.shape == (1, 1, 3)
        assert tuple(back[0, 0]) == (255, 0, 0)

    def test_round_trip_random(self, tmp_path, rng):
        pixels = rng.random((9, 7, 3)).astype(np.float32)
        frame = Frame(pixels=pixels, status=np.zeros((9, 7), np.uint8))
        path = tmp_path / "rand.png"
        write_image(frame, path)
        assert np.array_equal(read_image(path), frame.rgb8)
