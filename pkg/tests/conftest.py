import numpy as np
import pytest

from cgoplane.grid import ComplexField, FourierGrid


@pytest.fixture(scope="session")
def grid256():
    return FourierGrid(256, 4.0)


@pytest.fixture(scope="session")
def grid128():
    return FourierGrid(128, 4.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def gaussian_bump(grid, sigma=0.15, center=(0.0, 0.0), amp=1.0):
    return ComplexField.from_function(
        grid,
        lambda Z1, Z2: amp * np.exp(-((Z1 - center[0]) ** 2 + (Z2 - center[1]) ** 2)
                                    / (2 * sigma**2)),
    )


def supported_noise(grid, rng, radius=0.35):
    """Random complex field tapered to the padding-safe central region."""
    n = grid.n_per_side
    vals = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r2 = grid.Z1**2 + grid.Z2**2
    taper = np.exp(-np.maximum(r2 - radius**2, 0.0) / (2 * 0.05**2))
    return ComplexField(grid, vals * taper)
