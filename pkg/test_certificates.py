"""
Tests for the constructive exchange certificates.

Every generator runs on a few hundred random tasks and each sequence is
replayed move by move against X and K_{k,n-k}.
"""

import logging
import random
from functools import lru_cache
from typing import List

import pytest
from hypothesis import given, settings, strategies as st

from conftest import k4_with_pendant, octahedron, random_bijection_with_adjacent
from modules.certificates import (
    UNTRACKED_BIG, UNTRACKED_SMALL, apply_sequence, certify_exchange, cycle_navigate,
    exchange_big_side_k2, exchange_k_general, exchange_small_side_k2, graph_navigate,
    odd_cycle_exchange, transfer_certificate, validate_sequence,
)
from modules.errors import CertificateError, InvalidInputError, NavigationError
from modules.fs_core import apply_swap, exchangeable, identity, inverse, rank, transpose_tokens
from modules.graph_core import (
    Graph, complete_bipartite, complete_graph, cycle_graph, has_nontrivial_cut_edge, is_bipartite,
    is_cycle_graph, is_k_connected, theta_graph, wheel_graph,
)
from modules.graph_io import connected_corpus
from modules.random_lab import random_connected_corpus

# Configure logging
logger = logging.getLogger(__name__)

TASKS = 500


def pinched_triangle() -> Graph:
    """
    Triangle 0-1-2 where 2 has degree two and X - 2 is bipartite, so every
    odd cycle runs through 2.
    """
    return Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (0, 3), (3, 4), (4, 1), (3, 5), (5, 1)])


@lru_cache(maxsize=None)
def _small_k2_pool() -> List[Graph]:
    graphs = [g for n in (5, 6, 7) for g in connected_corpus(n) if not is_bipartite(g)]
    return graphs + [g for g in random_connected_corpus(8, 60, seed=81) if not is_bipartite(g)]


def _big_k2_ok(g: Graph) -> bool:
    return not is_bipartite(g) and not is_cycle_graph(g) and not has_nontrivial_cut_edge(g)


@lru_cache(maxsize=None)
def _big_k2_pool() -> List[Graph]:
    graphs = [g for n in (5, 6, 7) for g in connected_corpus(n) if _big_k2_ok(g)]
    return graphs + [g for g in random_connected_corpus(8, 60, seed=82) if _big_k2_ok(g)]


def _general_ok(g: Graph, k: int) -> bool:
    return not is_bipartite(g) and not is_cycle_graph(g) and is_k_connected(g, k - 1)


@lru_cache(maxsize=None)
def _general_pool() -> List[Graph]:
    graphs = [g for n in (6, 7) for g in connected_corpus(n) if _general_ok(g, 3)]
    return graphs + [g for g in random_connected_corpus(8, 80, seed=83) if _general_ok(g, 3)]


def _accepted(x: Graph, k: int, sigma, moves, u: int, v: int) -> bool:
    verdict = validate_sequence(x, complete_bipartite(k, x.order - k), sigma, moves,
                                transpose_tokens(sigma, u, v))
    if not verdict.accepted:
        logger.error(f"Rejected at {verdict.failed_index}: {verdict.reason} (X={x!r}, sigma={sigma})")
    return verdict.accepted


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_validate_sequence_examples():
    x, y = cycle_graph(5), complete_bipartite(2, 3)
    sigma = identity(5)

    empty = validate_sequence(x, y, sigma, [], sigma)
    assert empty and empty.final == sigma

    not_an_edge = validate_sequence(x, y, sigma, [(1, 2), (0, 2)], sigma)
    assert not not_an_edge and not_an_edge.failed_index == 1

    same_side = validate_sequence(x, y, sigma, [(2, 3)], sigma)
    assert same_side.failed_index == 0
    assert 'not adjacent in Y' in same_side.reason

    wrong_end = validate_sequence(x, y, sigma, [(1, 2)], sigma)
    assert not wrong_end.accepted
    assert wrong_end.failed_index is None
    assert wrong_end.final == (0, 2, 1, 3, 4)


def test_apply_sequence_raises_on_illegal_move():
    x, y = cycle_graph(5), complete_bipartite(2, 3)
    assert apply_sequence(x, y, identity(5), [(1, 2)]) == (0, 2, 1, 3, 4)
    with pytest.raises(CertificateError):
        apply_sequence(x, y, identity(5), [(3, 4)])


# ---------------------------------------------------------------------------
# Odd cycle exchange
# ---------------------------------------------------------------------------

@st.composite
def odd_cycle_tasks(draw):
    t = draw(st.sampled_from([3, 5, 7, 9]))
    i = draw(st.integers(min_value=0, max_value=t - 1))
    a, b = i, (i + 1) % t
    if draw(st.booleans()):
        a, b = b, a
    rest = iter(draw(st.permutations(list(range(2, t)))))
    sigma = tuple(0 if p == a else 1 if p == b else next(rest) for p in range(t))
    return t, sigma


@settings(max_examples=TASKS, deadline=None)
@given(odd_cycle_tasks())
def test_odd_cycle_exchange(task):
    t, sigma = task
    moves = odd_cycle_exchange(t, sigma)
    assert len(moves) == t * (t - 2)
    assert validate_sequence(cycle_graph(t), complete_bipartite(2, t - 2), sigma, moves,
                             transpose_tokens(sigma, 0, 1))


def test_odd_cycle_exchange_blocks():
    """Each block of t moves swaps the small pair and turns the big tokens one step."""
    t = 7
    moves = odd_cycle_exchange(t, identity(t))
    bigs = list(range(2, t))
    state = identity(t)
    for i in range(1, t - 1):
        for a, b in moves[(i - 1) * t:i * t]:
            state = apply_swap(state, a, b)
        assert state[:2] == ((1, 0) if i % 2 else (0, 1))
        shift = i % (t - 2)
        assert list(state[2:]) == bigs[shift:] + bigs[:shift]


@pytest.mark.parametrize('t, sigma', [
    (4, (0, 1, 2, 3)),
    (1, (0,)),
    (5, (0, 2, 1, 3, 4)),
    (5, (0, 1, 2, 3)),
])
def test_odd_cycle_exchange_rejects(t, sigma):
    with pytest.raises(InvalidInputError):
        odd_cycle_exchange(t, sigma)


# ---------------------------------------------------------------------------
# Navigation and conjugation
# ---------------------------------------------------------------------------

def test_cycle_navigate_goal_already_met():
    assert cycle_navigate([0, 1, 2, 3, 4], identity(5), lambda labels: labels[0] == 0, 2) == []


def test_cycle_navigate_moves_tracked_token():
    x, y = cycle_graph(5), complete_bipartite(2, 3)
    sigma = identity(5)
    moves = cycle_navigate(list(range(5)), sigma, lambda labels: labels[3] == 0, 2, tracked={0})
    assert moves
    state = apply_sequence(x, y, sigma, moves)
    assert state[3] == 0


def test_cycle_navigate_collapses_untracked_tokens():
    seen = []

    def goal(labels):
        seen.append(labels)
        return False

    with pytest.raises(NavigationError):
        cycle_navigate([0, 1, 2], identity(6), goal, 3, tracked={0})
    assert seen == [(0, UNTRACKED_SMALL, UNTRACKED_SMALL)]

    moves = cycle_navigate([0, 1, 2], (0, 3, 1, 4, 5, 2), lambda labels: labels[0] == UNTRACKED_BIG, 3,
                           tracked={1})
    assert len(moves) == 1


def test_graph_navigate_reaches_pendant():
    x, y = k4_with_pendant(), complete_bipartite(2, 3)
    sigma = identity(5)
    moves = graph_navigate(x, sigma, lambda labels: labels[4] == 0, 2, tracked={0})
    state = apply_sequence(x, y, sigma, moves)
    assert inverse(state)[0] == 4


def test_transfer_certificate():
    x, k = complete_graph(6), 3
    sigma = identity(6)
    prep = [(2, 3)]
    moved = apply_swap(sigma, 2, 3)
    at_end = certify_exchange(x, k, moved, 0, 1).moves
    moves = transfer_certificate(sigma, prep, at_end, 0, 1)
    assert moves[:1] == prep and moves[-1:] == prep
    assert _accepted(x, k, sigma, moves, 0, 1)


def test_transfer_certificate_rejects_prep_moving_the_pair():
    with pytest.raises(InvalidInputError):
        transfer_certificate(identity(6), [(2, 3), (0, 3)], [], 0, 1)


# ---------------------------------------------------------------------------
# Generators on hand-picked graphs
# ---------------------------------------------------------------------------

def test_small_side_on_pendant_edge():
    x = k4_with_pendant()
    sigma = (2, 3, 4, 0, 1)
    assert _accepted(x, 2, sigma, exchange_small_side_k2(x, sigma), 0, 1)


def test_big_side_on_pendant_edge():
    x = k4_with_pendant()
    sigma = (0, 1, 4, 2, 3)
    assert _accepted(x, 2, sigma, exchange_big_side_k2(x, sigma, 2, 3), 2, 3)


@pytest.mark.parametrize('x', [wheel_graph(6), theta_graph(), octahedron(), complete_graph(5)],
                         ids=['wheel6', 'theta', 'octahedron', 'k5'])
def test_big_side_every_edge(x):
    """Both big tokens on every edge of X, rest of sigma random."""
    rng = random.Random(x.num_edges)
    n = x.order
    for a, b in x.edge_list():
        rest = iter(rng.sample([t for t in range(n) if t not in (2, 3)], n - 2))
        sigma = tuple(2 if p == a else 3 if p == b else next(rest) for p in range(n))
        assert _accepted(x, 2, sigma, exchange_big_side_k2(x, sigma, 2, 3), 2, 3)


def test_general_exchange_needs_more_than_the_shortest_odd_cycle():
    """All three small tokens fill the only triangle and its apex has no way out."""
    x = pinched_triangle()
    assert _general_ok(x, 3)
    sigma = identity(6)
    moves = exchange_k_general(x, sigma, 1, 3)
    assert _accepted(x, 3, sigma, moves, 0, 1)
    assert exchangeable(x, complete_bipartite(3, 3), sigma, 0, 1)


def test_clearing_the_odd_cycle_through_x_is_logged(caplog):
    x = pinched_triangle()
    sigma = identity(6)
    with caplog.at_level(logging.WARNING, logger='modules.certificates'):
        moves = exchange_k_general(x, sigma, 1, 3)
    assert _accepted(x, 3, sigma, moves, 0, 1)
    warnings = [r.getMessage() for r in caplog.records
                if r.levelno == logging.WARNING and 'cleared through X' in r.getMessage()]
    assert warnings
    assert 'pair=[' in warnings[0]
    assert 'k=3' in warnings[0]
    assert f"sigma={list(sigma)}" in warnings[0]
    assert f"X edges={x.edge_list()}" in warnings[0]
    assert 'cycle=[' in warnings[0]


def test_general_exchange_on_octahedron(rng):
    x = octahedron()
    for _ in range(100):
        u, w = rng.sample(range(3), 2)
        sigma = random_bijection_with_adjacent(x, w, u, rng)
        assert _accepted(x, 3, sigma, exchange_k_general(x, sigma, u, 3, w=w), w, u)


@pytest.mark.parametrize('x', [wheel_graph(8), complete_graph(8)], ids=['wheel8', 'k8'])
def test_general_exchange_k4(x, rng):
    assert _general_ok(x, 4)
    for _ in range(50):
        u, w = rng.sample(range(4), 2)
        sigma = random_bijection_with_adjacent(x, w, u, rng)
        assert _accepted(x, 4, sigma, exchange_k_general(x, sigma, u, 4, w=w), w, u)


def test_generator_rejections():
    with pytest.raises(InvalidInputError):
        exchange_small_side_k2(complete_graph(4), identity(4))
    with pytest.raises(InvalidInputError):
        exchange_small_side_k2(cycle_graph(6), identity(6))
    with pytest.raises(InvalidInputError):
        exchange_small_side_k2(cycle_graph(5), (0, 2, 1, 3, 4))
    with pytest.raises(InvalidInputError):
        exchange_big_side_k2(cycle_graph(5), identity(5), 2, 3)
    with pytest.raises(InvalidInputError):
        exchange_big_side_k2(wheel_graph(6), identity(6), 1, 2)
    with pytest.raises(InvalidInputError):
        exchange_k_general(cycle_graph(7), identity(7), 1, 3)
    with pytest.raises(InvalidInputError):
        exchange_k_general(complete_bipartite(3, 3), identity(6), 1, 3)
    with pytest.raises(InvalidInputError):
        exchange_k_general(complete_graph(6), identity(6), 1, 2)


# ---------------------------------------------------------------------------
# Generators on random tasks
# ---------------------------------------------------------------------------

def test_small_side_k2_random_tasks(rng):
    pool = _small_k2_pool()
    for _ in range(TASKS):
        x = rng.choice(pool)
        sigma = random_bijection_with_adjacent(x, 0, 1, rng)
        assert _accepted(x, 2, sigma, exchange_small_side_k2(x, sigma), 0, 1), repr(x)


def test_big_side_k2_random_tasks(rng):
    pool = _big_k2_pool()
    for _ in range(TASKS):
        x = rng.choice(pool)
        u, v = rng.sample(range(2, x.order), 2)
        sigma = random_bijection_with_adjacent(x, u, v, rng)
        assert _accepted(x, 2, sigma, exchange_big_side_k2(x, sigma, u, v), u, v), repr(x)


def test_general_k3_random_tasks(rng):
    pool = _general_pool()
    for _ in range(TASKS):
        x = rng.choice(pool)
        w, u = rng.sample(range(3), 2)
        sigma = random_bijection_with_adjacent(x, w, u, rng)
        assert _accepted(x, 3, sigma, exchange_k_general(x, sigma, u, 3, w=w), w, u), repr(x)


def test_generators_agree_with_the_oracle(rng):
    """Inputs a generator accepts are exchangeable by exhaustive search."""
    cases = []
    for pool, k, pair in ((_small_k2_pool(), 2, (0, 1)), (_big_k2_pool(), 2, (2, 3)),
                          (_general_pool(), 3, (0, 1))):
        small = [g for g in pool if g.order <= 7]
        cases.extend((rng.choice(small), k, pair) for _ in range(8))
    for x, k, (u, v) in cases:
        sigma = random_bijection_with_adjacent(x, u, v, rng)
        certificate = certify_exchange(x, k, sigma, u, v)
        assert certificate.validated
        assert exchangeable(x, complete_bipartite(k, x.order - k), sigma, u, v)


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------

def test_certify_single_swap():
    certificate = certify_exchange(cycle_graph(5), 2, identity(5), 1, 2)
    assert certificate.procedure == 'single-swap'
    assert certificate.moves == [(1, 2)]


def test_certify_small_side_report():
    sigma = identity(5)
    certificate = certify_exchange(cycle_graph(5), 2, sigma, 0, 1)
    assert certificate.procedure == 'small-side-k2'
    report = certificate.to_dict()
    assert report['validated'] is True
    assert report['start_rank'] == 0
    assert report['end_rank'] == rank(transpose_tokens(sigma, 0, 1)) == 24
    assert report['length'] == len(report['moves']) == 15


def test_certify_dispatch():
    assert certify_exchange(wheel_graph(6), 2, identity(6), 2, 3).procedure == 'big-side-k2'
    assert certify_exchange(octahedron(), 3, (0, 2, 1, 3, 4, 5), 0, 1).procedure == 'small-side-general'


@pytest.mark.parametrize('x, k, sigma, u, v', [
    (octahedron(), 3, identity(6), 3, 4),
    (cycle_graph(5), 2, identity(5), 0, 2),
    (cycle_graph(5), 3, identity(5), 0, 1),
    (cycle_graph(5), 2, identity(5), 1, 1),
    (cycle_graph(6), 2, identity(6), 0, 1),
])
def test_certify_rejections(x, k, sigma, u, v):
    with pytest.raises(InvalidInputError):
        certify_exchange(x, k, sigma, u, v)
