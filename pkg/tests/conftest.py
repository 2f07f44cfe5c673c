import numpy as np
import pytest

from hpaxis import reference


@pytest.fixture(scope="session")
def classic_model():
    return reference.classic_model()


@pytest.fixture(scope="session")
def extended_model():
    return reference.extended_model()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_rates(rng, n=1):
    """Log-uniform positive rate draws spanning two decades around 1."""
    out = 10.0 ** rng.uniform(-2, 1, size=(n, 5))
    return out if n > 1 else out[0]
