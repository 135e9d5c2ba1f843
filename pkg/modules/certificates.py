"""
Constructive exchange certificates for FS(X, K_{k,n-k}).

Every generator here builds an explicit swap sequence that exchanges two
tokens, following the case analysis of the connectivity proofs for
complete bipartite token graphs. Tokens 0..k-1 form the small side and
k..n-1 the big side; a swap is legal when exactly one of the two tokens
is small.

Generators never search FS(X, Y) itself. The only searches run over
labellings in which every token except one or two tracked ones collapses
to its side. When a structure the construction relies on is missing they
raise ProofGapError and log the instance.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from modules.errors import CertificateError, InvalidInputError, NavigationError, ProofGapError
from modules.fs_core import (
    Bijection, apply_swap, inverse, rank, transpose_tokens, validate_bijection,
)
from modules.graph_core import (
    Edge, Graph, complete_bipartite, has_nontrivial_cut_edge, is_bipartite, is_connected,
    is_cycle_graph, is_k_connected, normalize_edge, shortest_cycle_through_edge,
    shortest_odd_cycle, shortest_path_between,
)

# Configure logging
logger = logging.getLogger(__name__)

SwapSequence = List[Edge]

# Labels used by the navigators for tokens outside the tracked set
UNTRACKED_SMALL = -1
UNTRACKED_BIG = -2


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class SequenceVerdict:
    accepted: bool
    failed_index: Optional[int] = None
    reason: str = ''
    final: Optional[Bijection] = None

    def __bool__(self) -> bool:
        return self.accepted


def validate_sequence(x: Graph, y: Graph, sigma: Sequence[int], seq: Iterable[Sequence[int]],
                      expected: Sequence[int]) -> SequenceVerdict:
    """
    Replay seq from sigma and compare the endpoint with expected.

    Args:
        x: Position graph
        y: Token graph
        sigma: Start bijection
        seq: Moves (a, b), applied left to right
        expected: Required final bijection

    Returns:
        SequenceVerdict: accepted, or the index and reason of the first
        illegal move (failed_index is None for an endpoint mismatch)
    """
    state = validate_bijection(sigma, x.order)
    expected = validate_bijection(expected, x.order)
    for i, move in enumerate(seq):
        a, b = int(move[0]), int(move[1])
        if not (0 <= a < x.order and 0 <= b < x.order) or a == b or not x.has_edge(a, b):
            return SequenceVerdict(False, i, f"({a},{b}) is not an edge of X", state)
        if not y.has_edge(state[a], state[b]):
            return SequenceVerdict(False, i, f"tokens {state[a]},{state[b]} are not adjacent in Y", state)
        state = apply_swap(state, a, b)
    if state != expected:
        return SequenceVerdict(False, None, "final bijection differs from the expected one", state)
    return SequenceVerdict(True, None, '', state)


def apply_sequence(x: Graph, y: Graph, sigma: Sequence[int], seq: Iterable[Sequence[int]]) -> Bijection:
    """Replay seq from sigma, raising CertificateError on the first illegal move."""
    state = validate_bijection(sigma, x.order)
    for i, move in enumerate(seq):
        a, b = int(move[0]), int(move[1])
        if not x.has_edge(a, b) or not y.has_edge(state[a], state[b]):
            raise CertificateError(f"move {i} ({a},{b}) is illegal from {list(state)}")
        state = apply_swap(state, a, b)
    return state


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

class _Walker:
    """
    Applies swaps to a mutable bijection, checking each against X and
    K_{k,n-k}, and records them.
    """

    def __init__(self, x: Graph, k: int, sigma: Sequence[int]):
        self.x = x
        self.k = k
        self.state = list(sigma)
        self.pos = list(inverse(sigma))
        self.moves: SwapSequence = []

    def small_at(self, p: int) -> bool:
        return self.state[p] < self.k

    def swap(self, a: int, b: int) -> None:
        if not self.x.has_edge(a, b):
            raise CertificateError(f"move ({a},{b}) is not an edge of X")
        ta, tb = self.state[a], self.state[b]
        if (ta < self.k) == (tb < self.k):
            raise CertificateError(f"move ({a},{b}) would swap tokens {ta},{tb} of the same side")
        self.state[a], self.state[b] = tb, ta
        self.pos[ta], self.pos[tb] = b, a
        self.moves.append((a, b))

    def run(self, seq: Iterable[Edge]) -> None:
        for a, b in seq:
            self.swap(a, b)

    def walk(self, path: Sequence[int]) -> None:
        """Carry the token at path[0] to path[-1]."""
        for p, q in zip(path, path[1:]):
            self.swap(p, q)

    def mark(self) -> int:
        return len(self.moves)

    def undo(self, start: int, end: int) -> None:
        """Replay moves[start:end] backwards."""
        for a, b in reversed(self.moves[start:end]):
            self.swap(a, b)


def _orient(cycle: Sequence[int], first: int, second: int) -> List[int]:
    """Rotate/reflect cycle so it reads first, second, ..."""
    r = len(cycle)
    i = list(cycle).index(first)
    if cycle[(i + 1) % r] == second:
        return [cycle[(i + j) % r] for j in range(r)]
    if cycle[(i - 1) % r] == second:
        return [cycle[(i - j) % r] for j in range(r)]
    raise ProofGapError(f"{first} and {second} are not consecutive on cycle {list(cycle)}")


def _cycle_neighbors(cycle: Sequence[int], p: int) -> Tuple[int, int]:
    r = len(cycle)
    i = list(cycle).index(p)
    return cycle[(i - 1) % r], cycle[(i + 1) % r]


def _odd_cycle_moves(oriented: Sequence[int]) -> SwapSequence:
    """
    Swaps along c2c3, ..., c(t-1)ct, c1c2, ctc1, repeated t-2 times, for an
    odd cycle listed c1..ct with the two small tokens on c1 and c2.
    """
    t = len(oriented)
    d = list(oriented)
    block = [(d[j], d[j + 1]) for j in range(1, t - 1)] + [(d[0], d[1]), (d[t - 1], d[0])]
    return block * (t - 2)


def odd_cycle_exchange(t: int, sigma: Sequence[int]) -> SwapSequence:
    """
    Exchange the small tokens 0 and 1 on the cycle 0-1-...-(t-1) against
    K_{2,t-2}.

    Args:
        t: Odd cycle length, at least 3
        sigma: Bijection whose tokens 0 and 1 sit on adjacent positions

    Returns:
        SwapSequence of exactly t(t-2) moves ending at (0 1) o sigma
    """
    if t < 3 or t % 2 == 0:
        raise InvalidInputError(f"odd cycle exchange needs an odd t >= 3, got {t}")
    sigma = validate_bijection(sigma, t)
    inv = inverse(sigma)
    p0, p1 = inv[0], inv[1]
    if (p0 - p1) % t not in (1, t - 1):
        raise InvalidInputError(f"tokens 0 and 1 sit on non-adjacent positions {p0} and {p1}")
    return _odd_cycle_moves(_orient(list(range(t)), p0, p1))


def _label_search(slots: Sequence[int], links: Sequence[Tuple[int, int]], sigma: Sequence[int],
                  goal: Callable[[Tuple[int, ...]], bool], k: int, tracked: Optional[Iterable[int]],
                  where: str) -> SwapSequence:
    """Breadth-first search over labellings of `slots`, moving along `links` (index pairs)."""
    keep: Optional[Set[int]] = set(tracked) if tracked is not None else None

    def label(token: int) -> int:
        if keep is None or token in keep:
            return token
        return UNTRACKED_SMALL if token < k else UNTRACKED_BIG

    def small(lbl: int) -> bool:
        return lbl == UNTRACKED_SMALL or 0 <= lbl < k

    start = tuple(label(sigma[p]) for p in slots)
    if goal(start):
        return []

    parent: Dict[Tuple[int, ...], Optional[Tuple[Tuple[int, ...], Edge]]] = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for i, j in links:
            if small(state[i]) == small(state[j]):
                continue
            nxt = list(state)
            nxt[i], nxt[j] = nxt[j], nxt[i]
            key = tuple(nxt)
            if key in parent:
                continue
            parent[key] = (state, (slots[i], slots[j]))
            if goal(key):
                moves: SwapSequence = []
                cur = key
                while parent[cur] is not None:
                    prev, move = parent[cur]
                    moves.append(move)
                    cur = prev
                moves.reverse()
                return moves
            queue.append(key)
    raise NavigationError(f"goal unreachable by moves along {where} ({len(parent)} states explored)")


def cycle_navigate(cycle: Sequence[int], sigma: Sequence[int], goal: Callable[[Tuple[int, ...]], bool],
                   k: int, tracked: Optional[Iterable[int]] = None) -> SwapSequence:
    """
    Shortest sequence of swaps along the edges of `cycle` reaching a
    bijection that satisfies `goal`.

    Args:
        cycle: Positions of a cycle of X, in cyclic order
        sigma: Current bijection
        goal: Predicate over the token labels read along `cycle`
            (labels[i] is the token on cycle[i]); tokens outside `tracked`
            read as UNTRACKED_SMALL or UNTRACKED_BIG
        k: Small side size of the token graph K_{k,n-k}
        tracked: Tokens whose identity matters (None tracks all)

    Returns:
        SwapSequence using only cycle edges; [] when goal already holds

    Raises:
        NavigationError: goal is unreachable by cycle moves
    """
    r = len(cycle)
    links = [(i, (i + 1) % r) for i in range(r)]
    return _label_search(list(cycle), links, sigma, goal, k, tracked, f"cycle {list(cycle)}")


def graph_navigate(x: Graph, sigma: Sequence[int], goal: Callable[[Tuple[int, ...]], bool],
                   k: int, tracked: Iterable[int]) -> SwapSequence:
    """
    Like cycle_navigate, over every edge of X. Labels are indexed by
    position, and untracked tokens collapse to their side so the search
    stays small for a handful of tracked tokens.
    """
    return _label_search(list(range(x.order)), x.edge_list(), sigma, goal, k, tracked, "X")


def transfer_certificate(sigma: Sequence[int], prep: Sequence[Edge], cert_at_end: Sequence[Edge],
                         u: int, v: int) -> SwapSequence:
    """
    Conjugate a certificate found at prep(sigma) back to sigma.

    Args:
        sigma: Start bijection
        prep: Moves that never carry token u or v
        cert_at_end: Certificate exchanging u and v from prep(sigma)
        u: First exchanged token
        v: Second exchanged token

    Returns:
        prep + cert_at_end + reversed(prep)
    """
    state = list(sigma)
    for i, (a, b) in enumerate(prep):
        if state[a] in (u, v) or state[b] in (u, v):
            raise InvalidInputError(f"prep move {i} ({a},{b}) moves token {u} or {v}")
        state[a], state[b] = state[b], state[a]
    return list(prep) + list(cert_at_end) + list(reversed(prep))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

class _ExchangeBuilder:
    """
    Shared state for one certificate: the walker, the host graph and its
    shortest odd cycle.
    """

    def __init__(self, x: Graph, k: int, sigma: Sequence[int]):
        self.x = x
        self.k = k
        self.sigma = tuple(sigma)
        self.walker = _Walker(x, k, sigma)
        self.max_depth = 4 * k + 16
        self._odd_cycle: Optional[List[int]] = None

    @property
    def odd_cycle(self) -> List[int]:
        if self._odd_cycle is None:
            cycle = shortest_odd_cycle(self.x)
            if cycle is None:
                raise InvalidInputError("X is bipartite")
            self._odd_cycle = cycle
        return self._odd_cycle

    def gap(self, message: str) -> ProofGapError:
        logger.warning(
            f"Potential proof gap: {message}; X edges={self.x.edge_list()}, k={self.k}, "
            f"sigma={list(self.sigma)}"
        )
        return ProofGapError(message)

    def finish(self, u: int, v: int) -> SwapSequence:
        expected = transpose_tokens(self.sigma, u, v)
        if tuple(self.walker.state) != expected:
            raise CertificateError(f"construction ended at {self.walker.state}, expected {list(expected)}")
        return list(self.walker.moves)

    # -- small pair, k = 2 ----------------------------------------------------

    def small_pair_k2(self, s1: int, s2: int) -> None:
        w, x = self.walker, self.x
        cycle = self.odd_cycle
        on_cycle = set(cycle)
        p1, p2 = w.pos[s1], w.pos[s2]
        if not x.has_edge(p1, p2):
            raise CertificateError(f"tokens {s1},{s2} are not on adjacent positions")

        if p1 in on_cycle and p2 in on_cycle:
            w.run(_odd_cycle_moves(_orient(cycle, p1, p2)))
            return

        if p1 in on_cycle or p2 in on_cycle:
            p_on, p_off = (p1, p2) if p1 in on_cycle else (p2, p1)
            c = min(_cycle_neighbors(cycle, p_on))
            start = w.mark()
            w.swap(p_on, c)
            w.swap(p_off, p_on)
            end = w.mark()
            self.small_pair_k2(s1, s2)
            w.undo(start, end)
            return

        path = shortest_path_between(x, [p1, p2], cycle)
        if path is None:
            raise self.gap("no path from the small tokens to the odd cycle")
        x0 = p2 if path[0] == p1 else p1
        start = w.mark()
        w.walk(path)
        w.swap(x0, path[0])
        w.walk(path[:-1])
        end = w.mark()
        self.small_pair_k2(s1, s2)
        w.undo(start, end)

    # -- big pair, k = 2 ------------------------------------------------------

    def _gather(self, u: int, v: int) -> None:
        """Bring both small tokens next to the u, v edge without moving u or v."""
        w, x = self.walker, self.x
        anchor = {w.pos[u], w.pos[v]}
        sources = [w.pos[0], w.pos[1]]
        for _ in range(2):
            targets = {q for p in anchor for q in x.adjacency[p]} - anchor
            path = shortest_path_between(x, sources, targets, avoid=anchor)
            if path is None:
                raise self.gap("small token cannot reach the u-v edge")
            w.walk(path)
            anchor.add(path[-1])
            sources = [w.pos[s] for s in (0, 1) if w.pos[s] not in anchor]
            if not sources:
                break

    def _one_sided_fix(self, u: int, v: int) -> None:
        """Give both small tokens a neighbor among the positions of u and v."""
        w, x = self.walker, self.x
        U, V = w.pos[u], w.pos[v]
        lonely = [s for s in (0, 1) if not (x.has_edge(w.pos[s], U) or x.has_edge(w.pos[s], V))]
        if not lonely:
            return
        if len(lonely) == 2:
            raise self.gap("neither small token touches the u-v edge after gathering")
        t = 1 - lonely[0]
        q = U if x.has_edge(w.pos[t], U) else V
        r = V if q == U else U
        w.swap(w.pos[t], q)
        w.swap(q, r)

    def _common_neighbor(self, u: int, v: int) -> Optional[int]:
        w, x = self.walker, self.x
        for c in (w.pos[u], w.pos[v]):
            if x.has_edge(w.pos[0], c) and x.has_edge(w.pos[1], c):
                return c
        return None

    def _triangle_dance(self, u: int, v: int, c: int) -> None:
        w = self.walker
        o = w.pos[v] if c == w.pos[u] else w.pos[u]
        triple = [(w.pos[0], c), (c, o), (w.pos[1], c)]
        w.run(triple)
        self.small_pair_k2(0, 1)
        w.run(triple)

    def _common_or_walk(self, u: int, v: int, cycle: List[int]) -> None:
        c = self._common_neighbor(u, v)
        if c is not None:
            self._triangle_dance(u, v, c)
            return
        on = [s for s in (0, 1) if self.walker.pos[s] in set(cycle)]
        if len(on) != 1:
            raise self.gap("expected exactly one small token on the cycle through u-v")
        self._walk_along_cycle(u, v, cycle)

    def big_pair_k2(self, u: int, v: int) -> None:
        w = self.walker
        start = w.mark()
        self._gather(u, v)
        self._one_sided_fix(u, v)
        end = w.mark()

        c = self._common_neighbor(u, v)
        if c is not None:
            self._triangle_dance(u, v, c)
        else:
            cycle = shortest_cycle_through_edge(self.x, (w.pos[u], w.pos[v]))
            if cycle is None:
                raise self.gap("the u-v edge lies on no cycle")
            on = sum(1 for s in (0, 1) if w.pos[s] in set(cycle))
            if on == 1:
                self._walk_along_cycle(u, v, cycle)
            elif on == 0:
                self._detour_via_cycle_neighbor(u, v, cycle)
            else:
                self._detour_via_outside_vertex(u, v, cycle)
        w.undo(start, end)

    def _walk_along_cycle(self, u: int, v: int, cycle: List[int]) -> None:
        """Slide the on-cycle small token round to the far side of u-v."""
        w, x = self.walker, self.x
        U, V = w.pos[u], w.pos[v]
        s_on = next(s for s in (0, 1) if w.pos[s] in set(cycle))
        p = w.pos[s_on]
        q = w.pos[1 - s_on]
        near = _cycle_neighbors(cycle, p)
        if U in near and V not in near:
            e1, e2 = U, V
        elif V in near and U not in near:
            e1, e2 = V, U
        else:
            raise self.gap("on-cycle small token is not beside exactly one of u, v")
        oriented = _orient(cycle, e1, p)
        if oriented[-1] != e2:
            raise self.gap("u and v are not consecutive on the cycle")
        if not x.has_edge(q, e2):
            raise self.gap("off-cycle small token is not adjacent to the far endpoint")
        start = w.mark()
        for j in range(1, len(oriented) - 2):
            w.swap(oriented[j], oriented[j + 1])
        end = w.mark()
        c = self._common_neighbor(u, v)
        if c is None:
            raise self.gap("no common neighbor after sliding along the cycle")
        self._triangle_dance(u, v, c)
        w.undo(start, end)

    def _six_swap_detour(self, u: int, v: int, e1: int, e2: int, p1: int, p2: int, via: int, cycle: List[int]) -> None:
        w = self.walker
        detour = [(p2, e2), (e1, e2), (e1, via), (p1, e1), (e1, e2), (p2, e2)]
        start = w.mark()
        w.run(detour)
        end = w.mark()
        self._common_or_walk(u, v, cycle)
        w.undo(start, end)

    def _detour_via_cycle_neighbor(self, u: int, v: int, cycle: List[int]) -> None:
        """Both small tokens off the cycle: push one onto it through u's position."""
        w, x = self.walker, self.x
        U, V = w.pos[u], w.pos[v]
        s1 = next((s for s in (0, 1) if x.has_edge(w.pos[s], U)), None)
        if s1 is None:
            raise self.gap("no small token adjacent to u")
        p1, p2 = w.pos[s1], w.pos[1 - s1]
        if not x.has_edge(p2, V):
            raise self.gap("second small token is not adjacent to v")
        a = next(c for c in _cycle_neighbors(cycle, U) if c != V)
        self._six_swap_detour(u, v, U, V, p1, p2, a, cycle)

    def _detour_via_outside_vertex(self, u: int, v: int, cycle: List[int]) -> None:
        """Both small tokens on the cycle: rotate, then push one off through c0."""
        w, x = self.walker, self.x
        r = len(cycle)
        if r < 4:
            raise self.gap("cycle through u-v too short to hold both small tokens and u, v")
        on_cycle = set(cycle)
        outside = {p: sorted(q for q in x.adjacency[p] if q not in on_cycle) for p in cycle}

        def flanked_with_exit(labels: Tuple[int, ...]) -> bool:
            for i in range(r):
                j = (i + 1) % r
                if {labels[i], labels[j]} != {u, v}:
                    continue
                if labels[i - 1] != UNTRACKED_SMALL or labels[(j + 1) % r] != UNTRACKED_SMALL:
                    continue
                if outside[cycle[i]] or outside[cycle[j]]:
                    return True
            return False

        try:
            nav = cycle_navigate(cycle, w.state, flanked_with_exit, self.k, tracked={u, v})
        except NavigationError as e:
            raise self.gap(f"cycle navigation failed: {e}")
        start = w.mark()
        w.run(nav)
        end = w.mark()
        U, V = w.pos[u], w.pos[v]
        e1, e2 = (U, V) if outside[U] else (V, U)
        c0 = outside[e1][0]
        p1 = next(c for c in _cycle_neighbors(cycle, e1) if c != e2)
        p2 = next(c for c in _cycle_neighbors(cycle, e2) if c != e1)
        self._six_swap_detour(u, v, e1, e2, p1, p2, c0, cycle)
        w.undo(start, end)

    # -- small pair, general k ----------------------------------------------

    def small_pair_general(self, a: int, b: int, depth: int = 0) -> None:
        if depth > self.max_depth:
            raise self.gap("recursion depth exceeded")
        w, x, k = self.walker, self.x, self.k
        cycle = self.odd_cycle
        on_cycle = set(cycle)
        pa, pb = w.pos[a], w.pos[b]
        if not x.has_edge(pa, pb):
            raise CertificateError(f"tokens {a},{b} are not on adjacent positions")
        on_small = [p for p in cycle if w.small_at(p)]
        cycle_has_big = len(on_small) < len(cycle)

        if pa in on_cycle and pb in on_cycle:
            if len(on_small) == 2:
                w.run(_odd_cycle_moves(_orient(cycle, pa, pb)))
            else:
                self._evict_third_small(a, b, depth)
        elif pa in on_cycle or pb in on_cycle:
            on_tok, off_tok = (a, b) if pa in on_cycle else (b, a)
            if cycle_has_big:
                self._step_onto_cycle(a, b, on_tok, off_tok, depth)
            else:
                self._open_cycle_slot(a, b, exclude=w.pos[on_tok], depth=depth)
        else:
            if cycle_has_big:
                self._walk_pair_to_cycle(a, b, depth)
            else:
                self._open_cycle_slot(a, b, exclude=None, depth=depth)

    def _off_cycle_smalls(self) -> Set[int]:
        on_cycle = set(self.odd_cycle)
        return {self.walker.pos[s] for s in range(self.k) if self.walker.pos[s] not in on_cycle}

    def _evict_third_small(self, a: int, b: int, depth: int) -> None:
        """Both on the cycle with other small tokens there: move one of those off."""
        w, x = self.walker, self.x
        cycle = self.odd_cycle
        r = len(cycle)
        index = {p: i for i, p in enumerate(cycle)}
        blocked = set(cycle) | self._off_cycle_smalls()
        candidates = sorted(c for c in range(x.order)
                            if c not in blocked and any(q in index for q in x.adjacency[c]))
        for c0 in candidates:
            slots = sorted(index[q] for q in x.adjacency[c0] if q in index)

            def ready(labels: Tuple[int, ...], slots=slots) -> bool:
                ia, ib = labels.index(a), labels.index(b)
                if (ia - ib) % r not in (1, r - 1):
                    return False
                return any(labels[i] == UNTRACKED_SMALL for i in slots)

            try:
                nav = cycle_navigate(cycle, w.state, ready, self.k, tracked={a, b})
            except NavigationError:
                continue
            start = w.mark()
            w.run(nav)
            y = next(cycle[i] for i in slots if w.small_at(cycle[i]) and w.state[cycle[i]] not in (a, b))
            w.swap(c0, y)
            end = w.mark()
            self.small_pair_general(a, b, depth + 1)
            w.undo(start, end)
            return
        # all-small cycle whose third tokens have no big outside neighbour
        self._reduce_through_x(a, b)

    def _reduce_through_x(self, a: int, b: int) -> None:
        """
        Move tokens through X, tracking only a and b, until the odd cycle
        holds exactly a and b side by side; exchange there and undo.
        """
        w = self.walker
        cycle = self.odd_cycle
        r = len(cycle)
        index = {p: i for i, p in enumerate(cycle)}

        def reduced(labels: Tuple[int, ...]) -> bool:
            pa, pb = labels.index(a), labels.index(b)
            if pa not in index or pb not in index or (index[pa] - index[pb]) % r not in (1, r - 1):
                return False
            return sum(1 for p in cycle if labels[p] == UNTRACKED_SMALL) == 0

        try:
            nav = graph_navigate(self.x, w.state, reduced, self.k, tracked={a, b})
        except NavigationError as e:
            raise self.gap(f"no arrangement leaves only {a},{b} on the shortest odd cycle: {e}")
        logger.warning(
            f"Odd cycle cleared through X for pair={sorted((a, b))} in {len(nav)} moves; "
            f"X edges={self.x.edge_list()}, k={self.k}, sigma={list(self.sigma)}, "
            f"state={list(w.state)}, cycle={cycle}"
        )
        start = w.mark()
        w.run(nav)
        end = w.mark()
        w.run(_odd_cycle_moves(_orient(cycle, w.pos[a], w.pos[b])))
        w.undo(start, end)

    def _step_onto_cycle(self, a: int, b: int, on_tok: int, off_tok: int, depth: int) -> None:
        """One token on the cycle: rotate a big beside it into reach, then step on."""
        w, x = self.walker, self.x
        cycle = self.odd_cycle
        r = len(cycle)
        p_off = w.pos[off_tok]
        reach = [i for i, c in enumerate(cycle) if x.has_edge(p_off, c)]

        def ready(labels: Tuple[int, ...]) -> bool:
            i_on = labels.index(on_tok)
            return any(labels[i] == UNTRACKED_BIG and (i_on - i) % r in (1, r - 1) for i in reach)

        try:
            nav = cycle_navigate(cycle, w.state, ready, self.k, tracked={on_tok})
        except NavigationError as e:
            raise self.gap(f"cycle navigation failed: {e}")
        start = w.mark()
        w.run(nav)
        i_on = cycle.index(w.pos[on_tok])
        c1 = next(cycle[i] for i in reach
                  if not w.small_at(cycle[i]) and (i_on - i) % r in (1, r - 1))
        w.swap(p_off, c1)
        end = w.mark()
        self.small_pair_general(a, b, depth + 1)
        w.undo(start, end)

    def _open_cycle_slot(self, a: int, b: int, exclude: Optional[int], depth: int) -> None:
        """The cycle is all small: swap a big in from outside."""
        w, x = self.walker, self.x
        cycle = self.odd_cycle
        blocked = set(cycle) | self._off_cycle_smalls()
        for c3 in sorted(c for c in cycle if c != exclude):
            c2 = next((q for q in x.neighbors(c3) if q not in blocked), None)
            if c2 is None:
                continue
            start = w.mark()
            w.swap(c2, c3)
            end = w.mark()
            self.small_pair_general(a, b, depth + 1)
            w.undo(start, end)
            return
        raise self.gap("no outside big token can enter the all-small odd cycle")

    def _walk_pair_to_cycle(self, a: int, b: int, depth: int) -> None:
        """Neither token on the cycle: walk the pair to a big on the cycle."""
        w, x = self.walker, self.x
        cycle = self.odd_cycle
        pa, pb = w.pos[a], w.pos[b]
        others = {w.pos[s] for s in range(self.k) if s not in (a, b)}
        targets = [c for c in cycle if not w.small_at(c)]
        path = shortest_path_between(x, [pa, pb], targets, avoid=others)
        if path is None:
            raise self.gap("no path from the pair to a big token on the odd cycle")
        x0 = pb if path[0] == pa else pa
        start = w.mark()
        w.walk(path)
        w.swap(x0, path[0])
        w.walk(path[:-1])
        end = w.mark()
        self.small_pair_general(a, b, depth + 1)
        w.undo(start, end)


def _positions(sigma: Sequence[int], u: int, v: int) -> Tuple[int, int]:
    inv = inverse(sigma)
    return inv[u], inv[v]


def exchange_small_side_k2(x: Graph, sigma: Sequence[int]) -> SwapSequence:
    """
    Exchange the small tokens 0 and 1 against K_{2,n-2}.

    Args:
        x: Connected non-bipartite graph on n >= 5 vertices
        sigma: Bijection with tokens 0 and 1 on adjacent positions

    Returns:
        SwapSequence ending at (0 1) o sigma
    """
    sigma = validate_bijection(sigma, x.order)
    if x.order < 5:
        raise InvalidInputError(f"needs n >= 5, got {x.order}")
    if not is_connected(x):
        raise InvalidInputError("X must be connected")
    if is_bipartite(x):
        raise InvalidInputError("X must be non-bipartite")
    p0, p1 = _positions(sigma, 0, 1)
    if not x.has_edge(p0, p1):
        raise InvalidInputError(f"tokens 0 and 1 sit on non-adjacent positions {p0}, {p1}")
    builder = _ExchangeBuilder(x, 2, sigma)
    builder.small_pair_k2(0, 1)
    return builder.finish(0, 1)


def exchange_big_side_k2(x: Graph, sigma: Sequence[int], u: int, v: int) -> SwapSequence:
    """
    Exchange two big tokens u, v against K_{2,n-2}.

    Args:
        x: Connected, non-bipartite, not a cycle, no non-trivial cut edge,
            n >= 5
        sigma: Bijection with u and v on adjacent positions
        u: Big token (>= 2)
        v: Big token (>= 2)

    Returns:
        SwapSequence ending at (u v) o sigma
    """
    sigma = validate_bijection(sigma, x.order)
    n = x.order
    if n < 5:
        raise InvalidInputError(f"needs n >= 5, got {n}")
    if not (2 <= u < n and 2 <= v < n) or u == v:
        raise InvalidInputError(f"u={u}, v={v} must be distinct big-side tokens")
    if not is_connected(x) or is_bipartite(x) or is_cycle_graph(x) or has_nontrivial_cut_edge(x):
        raise InvalidInputError("X must be connected, non-bipartite, not a cycle and free of non-trivial cut edges")
    pu, pv = _positions(sigma, u, v)
    if not x.has_edge(pu, pv):
        raise InvalidInputError(f"tokens {u} and {v} sit on non-adjacent positions {pu}, {pv}")
    builder = _ExchangeBuilder(x, 2, sigma)
    builder.big_pair_k2(u, v)
    return builder.finish(u, v)


def exchange_k_general(x: Graph, sigma: Sequence[int], u: int, k: int, w: int = 0) -> SwapSequence:
    """
    Exchange small tokens w and u against K_{k,n-k}.

    Args:
        x: (k-1)-connected, non-bipartite, not a cycle, n >= 2k >= 6
        sigma: Bijection with w and u on adjacent positions
        u: Small token other than w
        k: Small side size
        w: The other small token (default 0)

    Returns:
        SwapSequence ending at (w u) o sigma
    """
    sigma = validate_bijection(sigma, x.order)
    n = x.order
    if k < 3 or n < 2 * k:
        raise InvalidInputError(f"needs n >= 2k >= 6, got n={n}, k={k}")
    if not (0 <= u < k and 0 <= w < k) or u == w:
        raise InvalidInputError(f"tokens {w}, {u} must be distinct small-side tokens")
    if is_bipartite(x) or is_cycle_graph(x) or not is_k_connected(x, k - 1):
        raise InvalidInputError(f"X must be {k - 1}-connected, non-bipartite and not a cycle")
    pw, pu = _positions(sigma, w, u)
    if not x.has_edge(pw, pu):
        raise InvalidInputError(f"tokens {w} and {u} sit on non-adjacent positions {pw}, {pu}")
    builder = _ExchangeBuilder(x, k, sigma)
    builder.small_pair_general(w, u)
    return builder.finish(w, u)


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    """
    A validated exchange certificate.
    """
    moves: SwapSequence
    start: Bijection
    end: Bijection
    validated: bool
    procedure: str = ''
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'moves': [[a, b] for a, b in self.moves],
            'start_rank': rank(self.start),
            'end_rank': rank(self.end),
            'validated': self.validated,
            'procedure': self.procedure,
            'length': len(self.moves),
        }


def certify_exchange(x: Graph, k: int, sigma: Sequence[int], u: int, v: int) -> Certificate:
    """
    Build and validate a certificate exchanging tokens u and v against
    K_{k,n-k}, choosing the construction by the sides u and v lie on.

    Args:
        x: Position graph
        k: Small side size
        sigma: Start bijection with u and v on adjacent positions
        u: First token
        v: Second token

    Returns:
        Certificate with validated=True

    Raises:
        InvalidInputError: bad arguments or no construction for this pair
        CertificateError: construction failed or did not validate
    """
    n = x.order
    sigma = validate_bijection(sigma, n)
    if not 1 <= k <= n - k:
        raise InvalidInputError(f"need 1 <= k <= n-k, got k={k}, n={n}")
    if not (0 <= u < n and 0 <= v < n) or u == v:
        raise InvalidInputError(f"u={u}, v={v} must be distinct tokens in 0..{n - 1}")
    pu, pv = _positions(sigma, u, v)
    if not x.has_edge(pu, pv):
        raise InvalidInputError(f"tokens {u} and {v} sit on non-adjacent positions {pu}, {pv}")

    u_small, v_small = u < k, v < k
    if u_small != v_small:
        moves, procedure = [normalize_edge(pu, pv)], 'single-swap'
    elif k == 2 and u_small:
        moves, procedure = exchange_small_side_k2(x, sigma), 'small-side-k2'
    elif k == 2:
        moves, procedure = exchange_big_side_k2(x, sigma, u, v), 'big-side-k2'
    elif k >= 3 and u_small:
        moves, procedure = exchange_k_general(x, sigma, v, k, w=u), 'small-side-general'
    else:
        raise InvalidInputError(f"no constructive exchange for two big-side tokens with k={k}")

    expected = transpose_tokens(sigma, u, v)
    verdict = validate_sequence(x, complete_bipartite(k, n - k), sigma, moves, expected)
    if not verdict.accepted:
        raise CertificateError(f"certificate rejected at move {verdict.failed_index}: {verdict.reason}")
    logger.info(f"Certified exchange of {u},{v} via {procedure} in {len(moves)} moves")
    return Certificate(moves, sigma, expected, True, procedure)
