import random

import pytest
from hypothesis import settings

from fairwelfare.core import Allocation, Instance

settings.register_profile("suite", deadline=None, max_examples=150)
settings.load_profile("suite")


@pytest.fixture
def appendix_instance() -> Instance:
    """Two agents with identical values (4, 1, 1, 1, 1, 1, 1)."""
    row = (4, 1, 1, 1, 1, 1, 1)
    return Instance((row, row))


@pytest.fixture
def appendix_fixture_allocation() -> Allocation:
    """Agent 0 takes the 4-valued item, agent 1 the six 1-valued items."""
    return Allocation((0, 1, 1, 1, 1, 1, 1))


def random_instance(rng: random.Random, n_max: int = 3, m_max: int = 6, vmax: int = 10) -> Instance:
    n = rng.randint(1, n_max)
    m = rng.randint(0, m_max)
    return Instance(tuple(tuple(rng.randint(0, vmax) for _ in range(m)) for _ in range(n)))


def random_allocation(rng: random.Random, inst: Instance) -> Allocation:
    return Allocation(tuple(rng.randrange(inst.num_agents) for _ in range(inst.num_items)))
