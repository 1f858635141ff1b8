import numpy as np
import pytest

from lfprobe.octmap import (EMPTY_DISTANCE, MapChain, oct_decode, oct_encode,
                            texel_center, texel_fetch, texel_index)


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


class TestOctEncode:
    def test_up_axis_maps_to_center(self):
        assert np.allclose(oct_encode([0.0, 1.0, 0.0]), [0.5, 0.5])

    def test_equator_axis_maps_to_edge_midpoint(self):
        assert np.allclose(oct_encode([1.0, 0.0, 0.0]), [1.0, 0.5])

    def test_down_axis_folds_to_corner(self):
        # sign(0) = +1 selects the (1, 1) corner
        assert np.allclose(oct_encode([0.0, -1.0, 0.0]), [1.0, 1.0])

    def test_all_corners_decode_down(self):
        for uv in ([0, 0], [0, 1], [1, 0], [1, 1]):
            assert np.allclose(oct_decode(uv), [0.0, -1.0, 0.0])

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError):
            oct_encode([1.0, 1.0, 0.0])

    def test_output_in_unit_square(self):
        rng = np.random.default_rng(0)
        d = rng.normal(size=(5000, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        uv = oct_encode(d)
        assert uv.min() >= 0.0 and uv.max() <= 1.0


class TestOctDecode:
    def test_center_is_up(self):
        assert np.allclose(oct_decode([0.5, 0.5]), [0.0, 1.0, 0.0])

    def test_edge_midpoint_is_x(self):
        assert np.allclose(oct_decode([1.0, 0.5]), [1.0, 0.0, 0.0])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            oct_decode([1.2, 0.5])

    def test_round_trip_10000_random(self):
        rng = np.random.default_rng(42)
        d = rng.normal(size=(10000, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        back = oct_decode(oct_encode(d))
        # angular error < 1e-5 rad
        dots = np.clip(np.sum(d * back, axis=-1), -1.0, 1.0)
        assert np.arccos(dots).max() < 1e-5

    def test_texel_centers_are_unit(self):
        for res in (2, 4, 16):
            tx, ty = np.meshgrid(np.arange(res), np.arange(res))
            uv = texel_center(tx.ravel(), ty.ravel(), res)
            d = oct_decode(uv)
            assert np.allclose(np.linalg.norm(d, axis=-1), 1.0)

    def test_octant_coverage(self):
        # texel centers of any res >= 2 map reach all 8 octants
        res = 4
        tx, ty = np.meshgrid(np.arange(res), np.arange(res))
        d = oct_decode(texel_center(tx.ravel(), ty.ravel(), res))
        octants = set(map(tuple, (d >= 0).astype(int)))
        assert len(octants) == 8

    def test_fold_seam_continuity(self):
        # uv points straddling the lower-hemisphere fold decode to nearby
        # directions
        eps = 1e-4
        for u in np.linspace(0.05, 0.95, 19):
            a = oct_decode([u, eps])
            b = oct_decode([u, -0.0 + 0.0])  # on-seam
            dot = np.clip(np.dot(a, oct_decode([u, 0.0])), -1, 1)
            assert np.arccos(dot) < 1e-3
            assert np.arccos(np.clip(np.dot(a, b), -1, 1)) < 1e-3


class TestTexelFetch:
    def setup_method(self):
        self.map4 = np.arange(16, dtype=np.float32).reshape(4, 4)

    def test_center_uv(self):
        assert texel_fetch(self.map4, [0.5, 0.5]) == self.map4[2, 2]

    def test_clamp_at_one(self):
        assert texel_fetch(self.map4, [1.0, 1.0]) == self.map4[3, 3]

    def test_floor_rule(self):
        tx, ty = texel_index([0.26, 0.5], 4)
        assert (tx, ty) == (1, 2)

    def test_empty_propagates(self):
        m = np.full((4, 4), EMPTY_DISTANCE, dtype=np.float32)
        assert np.isinf(texel_fetch(m, [0.3, 0.7]))


class TestMapChain:
    def _chain(self, r_hi=8, r_lo=4):
        return MapChain(
            irradiance_hi=np.zeros((r_hi, r_hi, 3), dtype=np.float32),
            distance_hi=np.full((r_hi, r_hi), EMPTY_DISTANCE, np.float32),
            direction_hi=np.zeros((r_hi, r_hi, 3), dtype=np.float32),
            distance_lo=np.full((r_lo, r_lo), EMPTY_DISTANCE, np.float32),
            direction_lo=np.zeros((r_lo, r_lo, 3), dtype=np.float32),
        )

    def test_resolutions(self):
        c = self._chain()
        assert (c.res_hi, c.res_lo, c.factor) == (8, 4, 2)

    def test_non_multiple_rejected(self):
        with pytest.raises(ValueError):
            self._chain(r_hi=9, r_lo=4)

    def test_non_square_rejected(self):
        c = self._chain()
        with pytest.raises(ValueError):
            MapChain(c.irradiance_hi, np.zeros((8, 6), np.float32),
                     c.direction_hi, c.distance_lo, c.direction_lo)
