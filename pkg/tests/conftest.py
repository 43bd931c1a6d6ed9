import logging

import numpy as np
import pytest

from qstoch.povm_catalog import (
    povm_family, random_minimal_ic, six_state_povm, tetrahedron_povm, wh_sic,
)
from qstoch.quantum import hadamard
from qstoch.settings import reset_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(autouse=True)
def restore_qstoch_logger():
    # cli.main() applies dictConfig to the global 'qstoch' logger; undo it between tests
    log = logging.getLogger('qstoch')
    saved = (list(log.handlers), log.propagate, log.level, log.disabled)
    yield
    log.handlers[:] = saved[0]
    log.propagate, log.level, log.disabled = saved[1], saved[2], saved[3]


@pytest.fixture
def tetra():
    return tetrahedron_povm()


@pytest.fixture
def qutrit_sic():
    return wh_sic(3)


@pytest.fixture
def random_ic2():
    return random_minimal_ic(2, seed=11)


@pytest.fixture
def six_state():
    return six_state_povm()


@pytest.fixture
def sic_family():
    return povm_family('sic', seed=0)


@pytest.fixture
def random_family():
    return povm_family('random', seed=5)


@pytest.fixture
def had():
    return hadamard()


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
