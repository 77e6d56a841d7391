import numpy as np
import pytest

from wfs import (
    GridFunction,
    GridSpec,
    constant_weight,
    make_cube_family,
    power_weight,
    table_weight,
)


@pytest.fixture(scope="session")
def spec1():
    return GridSpec(dim=1, half_width=2.0, cells_per_axis=64)


@pytest.fixture(scope="session")
def spec1_fine():
    return GridSpec(dim=1, half_width=2.0, cells_per_axis=128)


@pytest.fixture(scope="session")
def spec2():
    return GridSpec(dim=2, half_width=2.0, cells_per_axis=16)


@pytest.fixture(scope="session")
def unit1(spec1):
    return constant_weight(spec1)


@pytest.fixture(scope="session")
def family1(spec1):
    return make_cube_family(spec1, depth=3, translations=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def preset_weights(spec):
    """Weight set used across characteristic and inequality tests."""
    rng = np.random.default_rng(99)
    return [
        constant_weight(spec),
        power_weight(spec, 0.3),
        power_weight(spec, 0.6),
        power_weight(spec, -0.5),
        table_weight(spec, rng.uniform(0.5, 2.0, size=spec.shape)),
    ]


def random_grid_function(spec, rng, low=0.0, high=1.0):
    return GridFunction(spec, rng.uniform(low, high, size=spec.shape))
