# tests/conftest.py
from hypothesis import settings
from pytest import fixture

from geo_core.sampling import sample_metric_points
from geo_core.zoo import random_instance, sphere

settings.register_profile("geo", derandomize=True, deadline=None, max_examples=15)
settings.load_profile("geo")


@fixture(scope="session")
def sampler():
    """sampler(instance, count, seed) -> seeded points of the instance's chart domain."""
    def draw(instance, count=5, seed=0):
        return sample_metric_points(instance.metric, count, seed)

    return draw


@fixture(scope="session")
def sphere4():
    return sphere(4, 1.0)


@fixture(scope="session")
def random4():
    return random_instance(4, 1)


@fixture(scope="session")
def random_points4(random4, sampler):
    return sampler(random4, 4, 2)
