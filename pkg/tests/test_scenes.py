import numpy as np
import pytest

from lfprobe.scenes import (PALETTE, AnalyticScene, Box, Checker, Sphere,
                            oracle_trace, oracle_trace_batch, room_scene,
                            sample_point_cloud)


def surface_distance(scene, points):
    """Independent oracle: distance from each point to the nearest primitive
    surface (absolute value of the boundary SDF)."""
    points = np.atleast_2d(points)
    best = np.full(points.shape[0], np.inf)
    for prim in scene.primitives:
        if isinstance(prim, Box):
            lo = np.asarray(prim.lo)
            hi = np.asarray(prim.hi)
            center = (lo + hi) / 2
            half = (hi - lo) / 2
            q = np.abs(points - center) - half
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
            inside = np.minimum(q.max(axis=-1), 0.0)
            d = np.abs(outside + inside)
        else:
            d = np.abs(np.linalg.norm(points - np.asarray(prim.center),
                                      axis=-1) - prim.radius)
        best = np.minimum(best, d)
    return best


class TestOracle:
    def test_box_slab_hit(self):
        scene = AnalyticScene((Box((-1, -1, 2), (1, 1, 3)),))
        t, _ = oracle_trace(scene, (0, 0, 0), (0, 0, 1))
        assert t == pytest.approx(2.0)

    def test_inside_sphere(self):
        scene = AnalyticScene((Sphere((0, 0, 0), 1.0),))
        t, _ = oracle_trace(scene, (0, 0, 0), (1, 0, 0))
        assert t == pytest.approx(1.0)

    def test_miss_returns_none(self):
        scene = AnalyticScene((Sphere((5, 0, 0), 1.0),))
        t, color = oracle_trace(scene, (0, 0, 0), (0, 0, 1))
        assert t is None and color is None

    def test_non_unit_direction_rejected(self):
        scene = room_scene()
        with pytest.raises(ValueError):
            oracle_trace(scene, (1, 1, 1), (0, 0, 2))

    def test_tie_breaks_to_lower_index(self):
        a = Box((0, 0, 2), (1, 1, 3), color=PALETTE["red"])
        b = Box((0, 0, 2), (1, 1, 3), color=PALETTE["blue"])
        t, color = oracle_trace(AnalyticScene((a, b)), (0.5, 0.5, 0),
                                (0, 0, 1))
        assert t == pytest.approx(2.0)
        assert color == PALETTE["red"]

    def test_hits_lie_on_surfaces_and_march_agrees(self, rng):
        """Every oracle hit point sits on a primitive surface, and no point
        strictly before the hit does (dense-march cross-check)."""
        scene = room_scene()
        center = np.array([1.5, 1.25, 3.0])
        for _ in range(200):
            o = center + rng.uniform(-1.0, 1.0, 3)
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            t, _ = oracle_trace(scene, o, d)
            assert t is not None and t > 0
            hit = o + t * d
            assert surface_distance(scene, hit)[0] < 1e-6
            ts = np.arange(1e-3, t - 1e-3, 1e-3)
            pts = o[None, :] + ts[:, None] * d[None, :]
            assert surface_distance(scene, pts).min() > 1e-4

    def test_room_walls_have_expected_colors(self):
        scene = room_scene(with_boxes=False)
        eye = (1.5, 1.25, 3.0)
        cases = [((0, 0, 1), PALETTE["yellow"]), ((0, 0, -1), PALETTE["blue"]),
                 ((-1, 0, 0), PALETTE["red"]), ((1, 0, 0), PALETTE["green"]),
                 ((0, -1, 0), PALETTE["gray"]), ((0, 1, 0), PALETTE["white"])]
        for d, expect in cases:
            _, color = oracle_trace(scene, eye, d)
            assert color == pytest.approx(expect)


class TestSampling:
    def test_unit_cube_count(self):
        scene = AnalyticScene((Box((0, 0, 0), (1, 1, 1)),))
        cloud = sample_point_cloud(scene, density=1000.0, seed=0)
        assert abs(cloud.positions.shape[0] - 6000) <= 300

    def test_sphere_count(self):
        scene = AnalyticScene((Sphere((0, 0, 0), 1.0),))
        cloud = sample_point_cloud(scene, density=100.0, seed=0)
        assert abs(cloud.positions.shape[0] - 4 * np.pi * 100) <= 63

    def test_deterministic(self, scene):
        a = sample_point_cloud(scene, density=100.0, seed=9)
        b = sample_point_cloud(scene, density=100.0, seed=9)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.colors, b.colors)

    def test_points_on_surfaces(self, scene):
        cloud = sample_point_cloud(scene, density=200.0, seed=3)
        assert surface_distance(scene, cloud.positions).max() < 1e-9

    def test_colors_in_palette(self, scene):
        cloud = sample_point_cloud(scene, density=50.0, seed=3)
        palette = np.array(list(PALETTE.values()))
        dists = np.linalg.norm(cloud.colors[:, None, :] - palette[None],
                               axis=-1)
        assert dists.min(axis=1).max() < 1e-6

    def test_invalid_density(self, scene):
        with pytest.raises(ValueError):
            sample_point_cloud(scene, density=0.0)

    def test_checker_colors_alternate(self):
        checker = Checker(PALETTE["red"], PALETTE["blue"], scale=0.5)
        scene = AnalyticScene((Box((0, 0, 0), (2, 2, 2), color=checker),))
        cloud = sample_point_cloud(scene, density=500.0, seed=0)
        reds = (cloud.colors == np.float32(PALETTE["red"])).all(axis=1)
        blues = (cloud.colors == np.float32(PALETTE["blue"])).all(axis=1)
        assert reds.any() and blues.any()
        assert (reds | blues).all()
