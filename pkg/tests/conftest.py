import numpy as np
import pytest

import weaktherm as wt


@pytest.fixture(scope="session")
def canonical_setup():
    return wt.ThermometrySetup.canonical_qubit()


@pytest.fixture(scope="session")
def default_grid():
    return wt.PointerGrid(20.0, 512)


@pytest.fixture(scope="session")
def unit_gaussian(default_grid):
    return wt.gaussian_pointer(default_grid, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
