import numpy as np
import pytest

from tsmcmc import LorenzConfig, Normalizer, simulate_lorenz


@pytest.fixture(scope="session")
def lorenz_z():
    """Z-scored chaotic trajectory used across the suite (2000 x 3)."""
    series = simulate_lorenz(LorenzConfig(steps=2000))
    return Normalizer().fit(series.values).transform(series.values)


@pytest.fixture(scope="session")
def lorenz_z_short():
    series = simulate_lorenz(LorenzConfig(steps=400))
    return Normalizer().fit(series.values).transform(series.values)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
