"""Shared band tables (session scope) so the expensive sweeps run once."""

import pytest

from blochpos.bands import BrillouinGrid, compute_bands
from blochpos.potential import cosine_for_strength, free_potential


@pytest.fixture(scope="session")
def default_grid():
    return BrillouinGrid()


@pytest.fixture(scope="session")
def cosine1_table(default_grid):
    """alpha = 1, two bands, default truncation."""
    return compute_bands(cosine_for_strength(1.0), default_grid, j_max=1, M=100)


@pytest.fixture(scope="session")
def cosine01_table(default_grid):
    """alpha = 0.1, lowest band only."""
    return compute_bands(cosine_for_strength(0.1), default_grid, j_max=0, M=100)


@pytest.fixture(scope="session")
def free_table():
    """Free particle, two folded bands; wider boundary margin keeps the
    returned pair split at the grid ends."""
    return compute_bands(free_potential(), BrillouinGrid(count=201, delta_z=0.01), j_max=1, M=30)


@pytest.fixture(scope="session")
def free_fine():
    """Free particle on the default fine grid, lowest band only."""
    return compute_bands(free_potential(), BrillouinGrid(), j_max=0, M=30)
