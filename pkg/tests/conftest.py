import numpy as np
import pytest

from rswlab.core import Field, Grid1D


@pytest.fixture
def grid():
    return Grid1D(128, 2 * np.pi)


@pytest.fixture
def wide_grid():
    return Grid1D(256, 30.0)


def smooth_field(grid, seed=0, modes=10, scale=1.0):
    """Deterministic band-limited field with O(1) amplitude."""
    rng = np.random.default_rng(seed)
    hat = np.zeros(grid.n // 2 + 1, dtype=complex)
    hat[1:modes] = (rng.standard_normal(modes - 1) + 1j * rng.standard_normal(modes - 1)) \
        * np.exp(-np.arange(1, modes) / 2.0)
    vals = np.fft.irfft(hat, grid.n)
    return Field(grid, vals / np.abs(vals).max() * scale)
