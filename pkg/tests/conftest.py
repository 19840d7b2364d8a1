import pytest

from submatroid.core import (
    CoverageValuation,
    GroundSet,
    Instance,
    ModularValuation,
    PartitionInstance,
    TabularValuation,
    UniformMatroid,
)


def coverage_pair():
    # element 0 covers {a, b}, element 1 covers {b, c}, unit weights
    ground = GroundSet(("x", "y"))
    return CoverageValuation(ground, (frozenset({0, 1}), frozenset({1, 2})), (1.0, 1.0, 1.0))


@pytest.fixture
def coverage():
    return coverage_pair()


@pytest.fixture
def modular_instance():
    ground = GroundSet.of_size(5)
    return Instance(ModularValuation(ground, (3.0, 1.0, 4.0, 1.0, 5.0)), UniformMatroid(ground, 2))


@pytest.fixture
def two_identical_users():
    resources = GroundSet.of_size(3, "r")
    Z = ModularValuation(resources, (2.0, 1.0, 3.0))
    return PartitionInstance((Z, Z), resources)


def table(ground, f):
    return TabularValuation.from_function(ground, f)
