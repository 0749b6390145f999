import pytest

from pysysid.ParameterSpace import ParameterBounds
from pysysid.Platforms import Platforms

@pytest.fixture
def finger_bounds():
    """Full bounds shipped for the finger setting"""
    return ParameterBounds.load(Platforms.bounds_path(Platforms.FINGER), Platforms.FINGER)

@pytest.fixture
def finger_physics(finger_bounds):
    """Tuned coordinates of the finger setting"""
    return finger_bounds.select(Platforms.TUNED_KINDS[Platforms.FINGER])

@pytest.fixture
def air_bounds():
    return ParameterBounds.load(Platforms.bounds_path(Platforms.TENTACLE_AIR), Platforms.TENTACLE_AIR)

@pytest.fixture
def water_bounds():
    return ParameterBounds.load(Platforms.bounds_path(Platforms.TENTACLE_WATER), Platforms.TENTACLE_WATER)

@pytest.fixture
def unit_bounds():
    """Four coordinates on [0, 1], the layout optimizer tests search"""
    return ParameterBounds([{"name": "x{}".format(i), "min": 0.0, "max": 1.0} for i in range(4)])

@pytest.fixture
def square_bounds():
    """Two coordinates on [0, 1]"""
    return ParameterBounds([{"name": "a", "min": 0.0, "max": 1.0}, {"name": "b", "min": 0.0, "max": 1.0}])
