"""
Shared fixtures for the FS lab test suite.
"""

import logging
import random
from typing import List

import pytest

from modules.config import LabConfig
from modules.fs_core import Bijection, inverse
from modules.graph_core import Graph, complete_bipartite

# Configure logging
logging.basicConfig(level=logging.INFO,
                    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: corpus-scale gates, deselect with -m "not slow"')


def octahedron() -> Graph:
    """K_{2,2,2} with parts {0,1}, {2,3}, {4,5}."""
    parts = [{0, 1}, {2, 3}, {4, 5}]
    return Graph.from_edges(6, [(a, b) for a in range(6) for b in range(a + 1, 6)
                                if not any(a in p and b in p for p in parts)])


def two_triangles_bridged() -> Graph:
    """Triangles 0-1-2 and 3-4-5 joined by the cut edge 2-3."""
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def bowtie() -> Graph:
    """Two triangles sharing vertex 0."""
    return Graph.from_edges(5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)])


def k4_with_pendant() -> Graph:
    """K_4 on 0..3 plus the pendant edge 3-4."""
    return Graph.from_edges(5, [(a, b) for a in range(4) for b in range(a + 1, 4)] + [(3, 4)])


def random_bijection_with_adjacent(x: Graph, u: int, v: int, rng: random.Random) -> Bijection:
    """Uniform bijection conditioned on tokens u and v sitting on an X-edge."""
    a, b = rng.choice(x.edge_list())
    if rng.random() < 0.5:
        a, b = b, a
    rest = [t for t in range(x.order) if t not in (u, v)]
    rng.shuffle(rest)
    images: List[int] = []
    for pos in range(x.order):
        if pos == a:
            images.append(u)
        elif pos == b:
            images.append(v)
        else:
            images.append(rest.pop())
    sigma = tuple(images)
    inv = inverse(sigma)
    assert x.has_edge(inv[u], inv[v])
    return sigma


@pytest.fixture
def lab_config():
    return LabConfig(max_n=10, memory_budget_mb=64.0)


@pytest.fixture
def chunked_config():
    """Tiny chunks so every BFS level spans several blocks."""
    return LabConfig(max_n=10, memory_budget_mb=64.0, chunk_size=7, threads=3)


@pytest.fixture
def rng():
    return random.Random(20240607)


@pytest.fixture
def k34():
    return complete_bipartite(3, 4)
