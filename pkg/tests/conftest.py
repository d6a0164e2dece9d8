import numpy as np
import pytest

from looise.designs import Design, sobol_measure, sobol_points, uniform_measure
from looise.kernels import KernelSpec


@pytest.fixture
def grid1d_design():
    return Design(points=np.linspace(0.0, 1.0, 10)[:, None], provenance="grid")


@pytest.fixture
def measure1d():
    return sobol_measure(1, 256)


def random_design(d: int, n: int, seed: int) -> Design:
    """Scrambled-Sobol design; convenient seeded test input."""
    return Design(points=sobol_points(d, n, scramble_seed=seed), provenance="sobol")


def gp_draw(kernel: KernelSpec, design: Design, seed: int) -> np.ndarray:
    from looise.testbed import sample_gp

    return sample_gp(kernel, design.points, seed)


def small_measure(d: int, N: int, seed: int | None = None):
    return uniform_measure(sobol_points(d, N, scramble_seed=seed))
