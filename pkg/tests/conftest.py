from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bessplan import fixtures
from bessplan.netmodel import Network


@pytest.fixture(scope="session")
def ieee9() -> Network:
    return fixtures.load_fixture_network("ieee9")


@pytest.fixture(scope="session")
def cigre14() -> Network:
    return fixtures.load_fixture_network("cigre14")


@pytest.fixture(scope="session")
def tiny3() -> Network:
    return fixtures.tiny3_network()


@pytest.fixture(scope="session")
def ieee9_nominal_injections(ieee9):
    """Table-style nominal operating point used as a linearization fixture."""
    p = np.zeros(ieee9.n_bus)
    q = np.zeros(ieee9.n_bus)
    p[ieee9.index_of(5)] = -0.35
    q[ieee9.index_of(5)] = -0.30
    p[ieee9.index_of(7)] = -1.00
    q[ieee9.index_of(7)] = -0.50
    p[ieee9.index_of(9)] = -0.343
    q[ieee9.index_of(9)] = -0.31
    p[ieee9.index_of(2)] = 0.90
    p[ieee9.index_of(3)] = 0.60
    return p, q


@pytest.fixture(scope="session")
def cigre14_nominal_injections(cigre14):
    p = np.zeros(cigre14.n_bus)
    q = np.zeros(cigre14.n_bus)
    demand_mva = {1: 15.3, 3: 0.28, 4: 0.44, 5: 0.75, 6: 0.56, 8: 0.6,
                  10: 0.49, 11: 0.34, 12: 15.3, 14: 0.22}
    pv_mw = {1: 2.0, 2: 1.8, 3: 1.5, 4: 0.8, 5: 0.5, 9: 0.4, 10: 0.6, 11: 2.0, 12: 2.0, 14: 1.8}
    tan_phi = np.sqrt(1 - 0.9**2) / 0.9
    for node, s_mva in demand_mva.items():
        p[cigre14.index_of(node)] -= s_mva * 0.9 / 100.0
        q[cigre14.index_of(node)] -= s_mva * 0.9 * tan_phi / 100.0
    for node, p_mw in pv_mw.items():
        p[cigre14.index_of(node)] += p_mw / 100.0
    return p, q
