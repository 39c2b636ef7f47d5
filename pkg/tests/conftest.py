import math

import pytest

from restartfa import zoo
from restartfa.linalg import PartialMatrix, complete_unitary
from restartfa.machine import CENT, DOLLAR, MachineSpec, StateRoles

_H = 1 / math.sqrt(2)


@pytest.fixture(scope="session")
def two_target_toy():
    """Quantum reset machine with two distinct reset targets.

    From q0 a round can reset into q1 and vice versa, so the closure has a
    genuinely coupled 2x2 linear system.
    """
    labels = ("q0", "q1", "A", "R", "r1", "r2")
    roles = StateRoles(
        nonhalting=frozenset({0, 1}),
        accepting=frozenset({2}),
        rejecting=frozenset({3}),
        reset_targets={4: 0, 5: 1},
    )
    columns = {
        CENT: {0: {0: _H, 4: _H}, 1: {1: _H, 5: _H}},
        "a": {0: {0: 0.5, 2: 0.5, 5: _H}, 1: {1: 0.5, 3: 0.5, 4: _H}},
        DOLLAR: {0: {2: 1.0}, 1: {3: 1.0}},
    }
    transitions = {}
    for sym in (CENT, "a", DOLLAR):
        pm = PartialMatrix(6)
        for col, entries in columns[sym].items():
            pm.set_entries(col, entries)
        transitions[sym] = complete_unitary(pm)
    return MachineSpec("quantum", "one-way", ("a",), labels, roles,
                       transitions, (1,) * 6, 0)


@pytest.fixture(scope="session")
def am_qfa():
    return zoo.build_am_qfa(1, 0.25)


@pytest.fixture(scope="session")
def am_pfa():
    return zoo.build_am_pfa(1, 0.25)


@pytest.fixture(scope="session")
def bm_pair():
    return zoo.build_bm(3, 0.1)


@pytest.fixture(scope="session")
def cm_pair():
    return zoo.build_cm(2, 0.1)


@pytest.fixture(scope="session")
def pal_pair():
    return zoo.build_pal(0.1)


@pytest.fixture(scope="session")
def leq_pair():
    return zoo.build_leq_qfa(0.1)


@pytest.fixture(scope="session")
def leq_pfa():
    return zoo.build_leq_pfa(0.2)
