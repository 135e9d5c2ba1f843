"""
Tests for graph construction and the structural predicates.

Exhaustive checks run over every connected graph on up to 6 vertices by
default; the 7-vertex corpus is marked slow.
"""

import logging
from itertools import combinations

import pytest

from conftest import octahedron, two_triangles_bridged
from modules.errors import InvalidInputError
from modules.graph_core import (
    Graph, NamedGraphSpec, augmented_bipartite, build_named, complete_bipartite, complete_graph,
    cycle_graph, find_nontrivial_k_bridge, has_nontrivial_cut_edge, is_bipartite, is_connected,
    is_connected_subset, is_cycle_graph, is_k_connected, is_theta, parse_named, path_graph,
    shortest_cycle_through_edge, shortest_odd_cycle, shortest_path_between, star_graph,
    star_plus_graph, theta_graph, vertex_connectivity, wheel_graph,
)
from modules.graph_io import connected_corpus

# Configure logging
logger = logging.getLogger(__name__)


def _brute_connectivity(g: Graph) -> int:
    if not is_connected(g):
        return 0
    if g.num_edges == g.order * (g.order - 1) // 2:
        return g.order - 1
    for size in range(1, g.order - 1):
        for cut in combinations(range(g.order), size):
            if not is_connected_subset(g, set(range(g.order)) - set(cut)):
                return size
    return g.order - 1


def _brute_nontrivial_cut_edge(g: Graph) -> bool:
    for u, v in g.edge_list():
        if g.degree(u) >= 2 and g.degree(v) >= 2 and not is_connected(g.without_edge(u, v)):
            return True
    return False


def _corpus(max_n: int):
    for n in range(2, max_n + 1):
        for g in connected_corpus(n):
            yield g


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def test_graph_rejects_bad_edges():
    """Loops, duplicates and out-of-range ends are refused."""
    with pytest.raises(InvalidInputError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(InvalidInputError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(InvalidInputError):
        Graph.from_edges(3, [(0, 3)])


def test_edge_count_is_half_degree_sum():
    for g in (theta_graph(), wheel_graph(7), complete_bipartite(3, 4), octahedron()):
        assert 2 * g.num_edges == sum(g.degrees())


def test_named_examples():
    """Edge counts and shapes of the named families."""
    k23 = parse_named('kbip:2,3')
    assert (k23.order, k23.num_edges) == (5, 6)

    c5 = parse_named('cycle:5')
    assert (c5.order, c5.num_edges) == (5, 5)
    assert set(c5.degrees()) == {2}

    theta = parse_named('theta')
    assert (theta.order, theta.num_edges) == (7, 8)
    assert not is_bipartite(theta)
    assert is_k_connected(theta, 2)

    assert star_graph(6).degree(0) == 5
    assert star_plus_graph(5).has_edge(1, 2)
    assert wheel_graph(6).degree(0) == 5
    assert complete_graph(5).num_edges == 10


def test_kbip_is_normalized():
    spec = NamedGraphSpec.parse('kbip:7,2')
    assert spec.params == (2, 7)
    assert str(spec) == 'kbip:2,7'
    g = build_named(spec)
    assert all(g.has_edge(i, j) for i in range(2) for j in range(2, 9))


@pytest.mark.parametrize('text', ['starplus:3', 'kbip:0,4', 'theta:7', 'cycle', 'hypercube:3', 'cycle:x'])
def test_named_rejections(text):
    with pytest.raises(InvalidInputError):
        parse_named(text)


def test_subdivide_adds_degree_two_path():
    g = two_triangles_bridged().subdivide(2, 3, times=2)
    assert g.order == 8
    assert not g.has_edge(2, 3)
    assert g.degree(6) == 2 and g.degree(7) == 2


def test_augmented_bipartite_edges():
    g = augmented_bipartite(3, 7)
    assert g.num_edges == 3 * 4 + 2
    assert g.has_edge(0, 1) and g.has_edge(0, 2) and not g.has_edge(1, 2)
    assert not is_bipartite(g)


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

def test_bipartite_examples():
    check = is_bipartite(complete_bipartite(2, 3))
    assert check
    assert sorted(len(p) for p in check.parts) == [2, 3]

    odd = is_bipartite(cycle_graph(5))
    assert not odd
    walk = odd.odd_walk
    assert walk[0] == walk[-1]
    assert (len(walk) - 1) % 2 == 1
    g = cycle_graph(5)
    assert all(g.has_edge(a, b) for a, b in zip(walk, walk[1:]))

    assert not is_bipartite(theta_graph())


@pytest.mark.parametrize('g, expected', [
    (cycle_graph(7), 2),
    (complete_bipartite(2, 4), 2),
    (star_graph(6), 1),
    (complete_graph(5), 4),
    (wheel_graph(7), 3),
    (Graph.from_edges(4, [(0, 1), (2, 3)]), 0),
])
def test_vertex_connectivity_examples(g, expected):
    assert vertex_connectivity(g) == expected


def test_complete_bipartite_connectivity():
    for s in range(1, 4):
        for t in range(s, 6):
            g = complete_bipartite(s, t)
            assert vertex_connectivity(g) == s
            assert is_bipartite(g)


def test_vertex_connectivity_matches_cut_enumeration():
    for g in _corpus(6):
        assert vertex_connectivity(g) == _brute_connectivity(g), repr(g)


@pytest.mark.slow
def test_vertex_connectivity_matches_cut_enumeration_seven():
    for g in connected_corpus(7):
        assert vertex_connectivity(g) == _brute_connectivity(g), repr(g)


def test_k_bridge_examples():
    g = two_triangles_bridged()
    bridge = find_nontrivial_k_bridge(g, 2)
    assert bridge is not None and set(bridge.vertices) == {2, 3}

    g3 = g.subdivide(2, 3)
    path = find_nontrivial_k_bridge(g3, 3)
    assert path is not None and path.k == 3
    assert path.vertices[1] == 6

    assert find_nontrivial_k_bridge(cycle_graph(8), 2) is None
    assert find_nontrivial_k_bridge(star_graph(5), 2) is None
    assert find_nontrivial_k_bridge(path_graph(4), 2).vertices == (1, 2)


def test_k_bridge_rejects_bad_arguments():
    with pytest.raises(InvalidInputError):
        find_nontrivial_k_bridge(cycle_graph(5), 1)
    with pytest.raises(InvalidInputError):
        find_nontrivial_k_bridge(Graph.from_edges(4, [(0, 1), (2, 3)]), 2)


def test_k_bridge_path_properties():
    """Returned paths are chains of cut edges with degree-2 interiors."""
    for g in _corpus(6):
        for k in (2, 3, 4):
            bridge = find_nontrivial_k_bridge(g, k)
            if bridge is None:
                continue
            vs = bridge.vertices
            assert len(vs) == k
            assert g.degree(vs[0]) >= 2 and g.degree(vs[-1]) >= 2
            assert all(g.degree(v) == 2 for v in vs[1:-1])
            for a, b in zip(vs, vs[1:]):
                assert g.has_edge(a, b)
                assert not is_connected(g.without_edge(a, b))


@pytest.mark.parametrize('max_n', [6, pytest.param(7, marks=pytest.mark.slow)])
def test_two_bridge_matches_edge_deletion(max_n):
    for g in _corpus(max_n):
        expected = _brute_nontrivial_cut_edge(g)
        assert (find_nontrivial_k_bridge(g, 2) is not None) == expected, repr(g)
        assert has_nontrivial_cut_edge(g) == expected


@pytest.mark.parametrize('j', [1, 2, 3])
def test_subdivided_bridge_grows(j):
    g = two_triangles_bridged().subdivide(2, 3, times=j)
    assert find_nontrivial_k_bridge(g, j + 2) is not None
    assert find_nontrivial_k_bridge(g, j + 3) is None


def test_shortest_odd_cycle_examples():
    assert len(shortest_odd_cycle(complete_graph(4))) == 3
    assert len(shortest_odd_cycle(theta_graph())) == 5
    assert shortest_odd_cycle(complete_bipartite(3, 3)) is None
    assert shortest_odd_cycle(octahedron()) == [0, 2, 4]


@pytest.mark.parametrize('max_n', [6, pytest.param(7, marks=pytest.mark.slow)])
def test_odd_cycle_exists_iff_not_bipartite(max_n):
    for g in _corpus(max_n):
        cycle = shortest_odd_cycle(g)
        assert (cycle is None) == bool(is_bipartite(g))
        if cycle is not None:
            assert len(cycle) % 2 == 1
            assert len(set(cycle)) == len(cycle)
            assert all(g.has_edge(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1]))


def test_shortest_cycle_through_edge_examples():
    c6 = cycle_graph(6)
    cycle = shortest_cycle_through_edge(c6, (2, 3))
    assert len(cycle) == 6 and cycle[:2] == [2, 3]

    tri = shortest_cycle_through_edge(complete_graph(4), (0, 1))
    assert len(tri) == 3

    assert shortest_cycle_through_edge(star_graph(5), (0, 1)) is None
    with pytest.raises(InvalidInputError):
        shortest_cycle_through_edge(c6, (0, 3))


def test_shortest_path_between_avoids_vertices():
    g = cycle_graph(6)
    path = shortest_path_between(g, {0}, {3}, avoid={1})
    assert path == [0, 5, 4, 3]
    assert shortest_path_between(g, {0}, {3}, avoid={1, 5}) is None


@pytest.mark.parametrize('g, expected', [
    (cycle_graph(9), True),
    (complete_bipartite(2, 2), True),
    (theta_graph(), False),
    (path_graph(5), False),
    (Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]), False),
])
def test_is_cycle_graph(g, expected):
    assert is_cycle_graph(g) == expected


def test_is_theta_recognises_relabelled_copies():
    g = theta_graph()
    relabel = [3, 0, 6, 2, 5, 1, 4]
    h = Graph.from_edges(7, [(relabel[a], relabel[b]) for a, b in g.edge_list()])
    assert is_theta(h)
    assert not is_theta(cycle_graph(7))
    assert not is_theta(wheel_graph(7))
