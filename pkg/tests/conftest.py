import numpy as np
import pytest

from phasewalk import cqed_walk, ideal_walk
from phasewalk.quantum_core import coherent_state

BALANCED = np.array(ideal_walk.BALANCED_COIN)
SWEEP_EPSILONS = (0.01, 0.012, 0.015, 0.018)


@pytest.fixture(scope="session")
def ideal_states():
    return ideal_walk.run_ideal(ideal_walk.IdealWalkConfig())


@pytest.fixture(scope="session")
def default_params():
    return cqed_walk.CqedParams()


@pytest.fixture(scope="session")
def default_initial():
    return coherent_state(3.0, 64, BALANCED)


def random_state(rng, fock_dim, coin_dim=2):
    from phasewalk.quantum_core import StateVector

    v = rng.normal(size=fock_dim * coin_dim) + 1j * rng.normal(size=fock_dim * coin_dim)
    return StateVector(v / np.linalg.norm(v), fock_dim, coin_dim)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2
