import numpy as np
import pytest

from tqd3d import hilbert, model
from tqd3d.model import ModelParams
from tqd3d.pulses import StirapParams


@pytest.fixture(scope="session")
def full_space():
    return hilbert.build_full_space()


@pytest.fixture(scope="session")
def subspace():
    return hilbert.build_subspace()


@pytest.fixture(scope="session")
def terms8(subspace):
    return model.hamiltonian_terms(subspace)


@pytest.fixture(scope="session")
def terms80(full_space):
    return model.hamiltonian_terms(full_space)


@pytest.fixture(scope="session")
def default_pulses():
    return StirapParams()


@pytest.fixture(scope="session")
def default_params():
    return ModelParams()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
