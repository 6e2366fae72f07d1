import numpy as np
import pytest

from hyperwave.grids import GridFunction, StateVector, make_grid
from hyperwave.linstab import assemble_L, riesz_projection, spectrum
from hyperwave.model import make_params


@pytest.fixture(scope="session")
def params7():
    return make_params(7)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(2.0, 64)


@pytest.fixture(scope="session")
def grid96():
    return make_grid(2.0, 96)


@pytest.fixture(scope="session")
def op96(params7, grid96):
    return assemble_L(params7, grid96)


@pytest.fixture(scope="session")
def spec96(op96):
    return spectrum(op96)


@pytest.fixture(scope="session")
def proj96(op96):
    return riesz_projection(op96)


@pytest.fixture(scope="session")
def op64(params7, grid64):
    return assemble_L(params7, grid64)


def even_state(grid, fn1, fn2):
    return StateVector(
        GridFunction.from_callable(grid, fn1, "even"),
        GridFunction.from_callable(grid, fn2, "even"),
    )


def odd_state(grid, fn1, fn2):
    return StateVector(
        GridFunction.from_callable(grid, fn1, "odd"),
        GridFunction.from_callable(grid, fn2, "odd"),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
