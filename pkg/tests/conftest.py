import numpy as np
import pytest

from skgs import (
    InitialData,
    PhysicsParams,
    eval_initial,
    make_grid,
)


@pytest.fixture
def unit_grid():
    return make_grid(0.0, 1.0, 16)


@pytest.fixture
def unit_params(unit_grid):
    return PhysicsParams.with_default_profiles(unit_grid)


@pytest.fixture
def wide_grid():
    return make_grid(-15.0, 15.0, 64)


@pytest.fixture
def soliton_state(wide_grid):
    return eval_initial(InitialData.soliton(0.3), wide_grid)


def random_fields(rng, n, batch=None):
    """Random (P, Q, U, V) arrays, optionally batched."""
    shape = (4, n) if batch is None else (4, batch, n)
    d = rng.standard_normal(shape)
    return d[0], d[1], d[2], d[3]
