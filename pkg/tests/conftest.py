import numpy as np
import pytest

from vortkit.fieldgrid import DIRICHLET0, PERIODIC, Grid, VectorField


def periodic_grid(n: int, length: float = 2.0 * np.pi) -> Grid:
    """Cube with n points per axis covering one period of ``length``."""
    h = length / n
    return Grid(dims=(n, n, n), spacing=(h, h, h), origin=(0.0, 0.0, 0.0), boundary=PERIODIC)


def dirichlet_grid(n: int, length: float = 2.0) -> Grid:
    """Closed box [0, length]^3 with n points per axis."""
    h = length / (n - 1)
    return Grid(dims=(n, n, n), spacing=(h, h, h), origin=(0.0, 0.0, 0.0), boundary=DIRICHLET0)


def abc_flow(grid: Grid, a: float = 1.0, b: float = 1.0, c: float = 1.0) -> VectorField:
    """Classic helical benchmark flow; its curl equals itself analytically."""
    x, y, z = grid.meshgrid()
    vx = a * np.sin(z) + c * np.cos(y)
    vy = b * np.sin(x) + a * np.cos(z)
    vz = c * np.sin(y) + b * np.cos(x)
    return VectorField(grid, np.stack([vx, vy, vz], axis=-1))


@pytest.fixture
def rng():
    return np.random.default_rng(20250819)
