"""Shared fixtures: small topologies with hand-checkable structure."""

import sys
from pathlib import Path

import pytest

from drwasim.topology import Topology, nsf14

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable


@pytest.fixture(scope="session")
def nsf():
    return nsf14()


@pytest.fixture
def triangle():
    return Topology(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def path4():
    # 0 - 1 - 2 - 3
    return Topology(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])


@pytest.fixture
def path7():
    # 0 - 1 - ... - 6: forces hop-bound relaxation for the end pair
    return Topology(7, [(i, i + 1, 1.0) for i in range(6)])


@pytest.fixture
def ring6():
    links = [(i, (i + 1) % 6, 1.0) for i in range(6)]
    return Topology(6, links)


@pytest.fixture
def cube8():
    # 3-cube: 8 nodes, 12 links, diameter 3
    edges = []
    for u in range(8):
        for bit in (1, 2, 4):
            v = u ^ bit
            if u < v:
                edges.append((u, v, 1.0))
    return Topology(8, edges)
