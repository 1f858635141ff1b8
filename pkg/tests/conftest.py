import numpy as np
import pytest

from lfprobe.bake import simulate_probe
from lfprobe.scenes import room_center, room_scene, sample_point_cloud


@pytest.fixture(scope="session")
def scene():
    return room_scene()


@pytest.fixture(scope="session")
def cloud(scene):
    # ~180k points: enough structure for tracing tests, quick to bake
    return sample_point_cloud(scene, density=2000.0, seed=7)


@pytest.fixture(scope="session")
def probe(cloud):
    return simulate_probe(cloud, room_center(), r_hi=512, r_lo=64)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


def random_unit(rng, n=None):
    v = rng.normal(size=(n, 3) if n else 3)
    return v / np.linalg.norm(v, axis=-1, keepdims=n is not None)
