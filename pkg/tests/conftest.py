import numpy as np
import pytest

from gupbell.quantum import ChshSettings


@pytest.fixture
def asym_settings():
    """A planar settings tuple with no special symmetry."""
    return ChshSettings.planar(0.2, 1.1, 0.35, -0.6)


@pytest.fixture
def custom_hp():
    """A dense Hermitian 4x4 perturbation with nonzero coupling into
    every excited level of the default Hamiltonian."""
    return np.array([
        [0.5, 0.5 + 0.1j, 0.0, 0.3j],
        [0.5 - 0.1j, -0.1, 0.4, 0.0],
        [0.0, 0.4, 0.0, 0.2],
        [-0.3j, 0.0, 0.2, -0.4],
    ])
