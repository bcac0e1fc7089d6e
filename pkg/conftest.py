"""
Shared fixtures for the test suite
"""

import numpy as np
import pytest

from quantum.noise import BUILTIN_PROFILES, NoiseModel
from quantum.observables import Hamiltonian
from tools.gate_actions import get_action_set


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def single_spin():
    return Hamiltonian.single_spin((1.0, 1.0, 1.0))


@pytest.fixture
def dimer():
    return Hamiltonian.dimer(1.0)


@pytest.fixture
def noiseless():
    return NoiseModel.off()


@pytest.fixture
def melbourne():
    return BUILTIN_PROFILES["melbourne-like"]


@pytest.fixture
def single_qubit_actions():
    return get_action_set(1)


@pytest.fixture
def two_qubit_actions():
    return get_action_set(2)
