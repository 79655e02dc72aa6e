import numpy as np
import pytest

from poisson_kitaev import reference_graphs as ref
from poisson_kitaev.double_group import AbelianBackend, SL2CBackend


@pytest.fixture(scope="session")
def sl2c():
    return SL2CBackend()


@pytest.fixture(scope="session")
def abelian():
    return AbelianBackend(2)


@pytest.fixture(params=["sl2c", "abelian"])
def backend(request, sl2c, abelian):
    return sl2c if request.param == "sl2c" else abelian


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def square():
    return ref.square()


@pytest.fixture
def theta():
    return ref.theta()


@pytest.fixture
def single_edge():
    return ref.single_edge()


@pytest.fixture
def loop_graph():
    return ref.loop_graph()


@pytest.fixture
def genus_one():
    return ref.genus_one()
