import pytest

from hvortex import RadialGrid, solve_profile


@pytest.fixture(scope="session")
def grid():
    return RadialGrid(20.0, 2000)


@pytest.fixture(scope="session")
def profile(grid):
    return solve_profile(1, grid)


@pytest.fixture(scope="session")
def profile2(grid):
    return solve_profile(2, grid)
