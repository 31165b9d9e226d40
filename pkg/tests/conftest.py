import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density_matrix(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    from gkpcavity.fock import DensityMatrix

    return DensityMatrix(m @ m.conj().T).normalize()
