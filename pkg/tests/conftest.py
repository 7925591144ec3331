import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, n, d, scale=1.0):
    a = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    h = scale * (a + a.conj().transpose(0, 2, 1)) / 2.0
    return np.ascontiguousarray(h)
