"""
Exhaustive oracle for friends-and-strangers graphs FS(X, Y).

A bijection is a tuple `images` with images[x] = token sitting on
position x; X is the position graph and Y the token graph. A swap along
the X-edge ab is legal when images[a] and images[b] are adjacent in Y.

States are addressed by their Lehmer rank in [0, n!). Component
enumeration is a level-synchronous BFS over ranks with a bit-packed
visited set; frontier blocks are expanded with numpy and, optionally,
in parallel, and every merge happens in one ordered step so reports do
not depend on the worker count.
"""

import math
import time
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from modules.batch_processing import BatchProcessor
from modules.config import HARD_MAX_N, LabConfig
from modules.errors import InstanceTooLargeError, InvalidInputError
from modules.graph_core import Edge, Graph, normalize_edge

# Configure logging
logger = logging.getLogger(__name__)

Bijection = Tuple[int, ...]

_FACT = np.array([math.factorial(i) for i in range(HARD_MAX_N + 1)], dtype=np.int64)

# Widest BFS level assumed by the memory estimate, as a share of n!
FRONTIER_SHARE = 1 / 16


# ---------------------------------------------------------------------------
# Bijections and ranking
# ---------------------------------------------------------------------------

def identity(n: int) -> Bijection:
    return tuple(range(n))


def validate_bijection(images: Sequence[int], n: Optional[int] = None) -> Bijection:
    sigma = tuple(int(t) for t in images)
    if n is not None and len(sigma) != n:
        raise InvalidInputError(f"bijection has length {len(sigma)}, expected {n}")
    if sorted(sigma) != list(range(len(sigma))):
        raise InvalidInputError(f"{list(sigma)} is not a permutation of 0..{len(sigma) - 1}")
    return sigma


def inverse(sigma: Sequence[int]) -> Bijection:
    """Token -> position map."""
    inv = [0] * len(sigma)
    for pos, token in enumerate(sigma):
        inv[token] = pos
    return tuple(inv)


def apply_swap(sigma: Sequence[int], a: int, b: int) -> Bijection:
    """sigma composed with the position transposition (a b)."""
    out = list(sigma)
    out[a], out[b] = out[b], out[a]
    return tuple(out)


def transpose_tokens(sigma: Sequence[int], u: int, v: int) -> Bijection:
    """(u v) composed with sigma: tokens u and v trade places."""
    swap = {u: v, v: u}
    return tuple(swap.get(t, t) for t in sigma)


def rank(sigma: Sequence[int]) -> int:
    """
    Lehmer rank of a permutation in the factorial number system.

    Args:
        sigma: Permutation of 0..n-1

    Returns:
        int: Rank in [0, n!)
    """
    sigma = validate_bijection(sigma)
    n = len(sigma)
    r = 0
    for i in range(n):
        smaller = sum(1 for j in range(i + 1, n) if sigma[j] < sigma[i])
        r += smaller * math.factorial(n - 1 - i)
    return r


def unrank(r: int, n: int) -> Bijection:
    if n < 1:
        raise InvalidInputError(f"order must be positive, got {n}")
    if not 0 <= r < math.factorial(n):
        raise InvalidInputError(f"rank {r} out of range [0, {n}!)")
    available = list(range(n))
    out = []
    for i in range(n):
        digit, r = divmod(r, math.factorial(n - 1 - i))
        out.append(available.pop(digit))
    return tuple(out)


def rank_many(perms: np.ndarray) -> np.ndarray:
    """Vectorized rank over the rows of an (m, n) permutation array."""
    m, n = perms.shape
    ranks = np.zeros(m, dtype=np.int64)
    for i in range(n - 1):
        smaller = (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
        ranks += smaller * _FACT[n - 1 - i]
    return ranks


def unrank_many(ranks: np.ndarray, n: int) -> np.ndarray:
    """Vectorized unrank; returns an (m, n) int8 array."""
    ranks = np.asarray(ranks, dtype=np.int64).copy()
    m = ranks.shape[0]
    rows = np.arange(m)
    available = np.ones((m, n), dtype=bool)
    out = np.empty((m, n), dtype=np.int8)
    for i in range(n):
        digit, ranks = np.divmod(ranks, _FACT[n - 1 - i])
        # position of the (digit+1)-th still-available value
        pick = np.argmax(np.cumsum(available, axis=1) == (digit + 1)[:, None], axis=1)
        out[:, i] = pick
        available[rows, pick] = False
    return out


def parse_bijection(text: str, n: int) -> Bijection:
    """
    Accept a rank ("17") or an explicit permutation ("2,0,1" or "2 0 1").
    """
    cleaned = text.strip().strip('[]()')
    parts = [p for p in cleaned.replace(',', ' ').split() if p]
    if not parts:
        raise InvalidInputError("empty bijection")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise InvalidInputError(f"malformed bijection '{text}'")
    if len(values) == 1 and n > 1:
        return unrank(values[0], n)
    return validate_bijection(values, n)


# ---------------------------------------------------------------------------
# Visited set
# ---------------------------------------------------------------------------

class VisitedBits:
    """
    One bit per rank, backed by a numpy uint8 array.

    Padding bits past `size` start set, so they are never reported clear.
    """
    SCAN_BLOCK = 1 << 14

    def __init__(self, size: int):
        self.size = size
        self.bits = np.zeros((size + 7) // 8, dtype=np.uint8)
        tail = size % 8
        if tail:
            self.bits[-1] = np.uint8((0xFF << tail) & 0xFF)
        self.marked = 0

    @staticmethod
    def nbytes_for(size: int) -> int:
        return (size + 7) // 8

    def test(self, ranks: np.ndarray) -> np.ndarray:
        ranks = np.asarray(ranks, dtype=np.int64)
        return ((self.bits[ranks >> 3] >> (ranks & 7).astype(np.uint8)) & 1).astype(bool)

    def mark(self, ranks: np.ndarray) -> None:
        """Mark ranks; callers pass ranks that are unique and unmarked."""
        ranks = np.asarray(ranks, dtype=np.int64)
        np.bitwise_or.at(self.bits, ranks >> 3, np.left_shift(1, ranks & 7).astype(np.uint8))
        self.marked += int(ranks.shape[0])

    def first_clear(self, start: int = 0) -> int:
        """Smallest clear rank >= start, or -1 when every bit is set."""
        byte = start >> 3
        while byte < self.bits.shape[0]:
            block = self.bits[byte:byte + self.SCAN_BLOCK]
            for offset in np.flatnonzero(block != 0xFF):
                b = byte + int(offset)
                value = int(self.bits[b])
                for bit in range(8):
                    r = b * 8 + bit
                    if r >= start and not (value >> bit) & 1:
                        return r
            byte += self.SCAN_BLOCK
        return -1

    def count(self) -> int:
        return self.marked


# ---------------------------------------------------------------------------
# Instance checks
# ---------------------------------------------------------------------------

def check_orders(x: Graph, y: Graph) -> int:
    if x.order != y.order:
        raise InvalidInputError(f"order mismatch: X has {x.order} vertices, Y has {y.order}")
    return x.order


def frontier_bytes(n: int, config: LabConfig, threads: Optional[int] = None) -> int:
    """
    Estimated peak size of the BFS frontier arrays.

    Two levels are alive at once (the one being expanded and the next),
    each assumed to hold at most FRONTIER_SHARE of the n! states, plus
    one chunk of expansion candidates per worker.

    Returns:
        int: Bytes
    """
    per_state = 16 + n  # int64 rank, int64 parent, int8 permutation row
    level = int(math.ceil(math.factorial(n) * FRONTIER_SHARE))
    workers = max(1, threads if threads is not None else config.threads)
    in_flight = min(config.chunk_size, level) * workers
    return (2 * level + in_flight) * per_state


def check_instance_size(n: int, config: LabConfig, bytes_per_state: float = 0.125,
                        threads: Optional[int] = None) -> int:
    """
    Reject instances beyond the order cap or the memory budget.

    The budget covers the per-rank arrays (visited bits, parents, labels)
    and the frontier estimate from frontier_bytes.

    Args:
        n: Order of X and Y
        config: Active configuration
        bytes_per_state: Memory needed per rank by the caller's search
        threads: Worker count the search will use (default: config.threads)

    Returns:
        int: n! (the number of states)
    """
    if n > HARD_MAX_N:
        raise InstanceTooLargeError(f"n={n} exceeds the hard limit {HARD_MAX_N}")
    if n > config.max_n:
        raise InstanceTooLargeError(f"n={n} exceeds the configured limit {config.max_n} (raise --max-n)")
    states = math.factorial(n)
    per_rank = int(math.ceil(states * bytes_per_state))
    frontier = frontier_bytes(n, config, threads)
    needed = per_rank + frontier
    if needed > config.memory_budget_bytes:
        raise InstanceTooLargeError(
            f"n={n} needs {needed / 2**20:.1f} MB ({per_rank / 2**20:.1f} MB per-rank arrays, "
            f"{frontier / 2**20:.1f} MB frontier), over the {config.memory_budget_mb} MB budget "
            f"(raise --memory-budget-mb)"
        )
    return states


# ---------------------------------------------------------------------------
# Neighbors
# ---------------------------------------------------------------------------

def fs_neighbors(x: Graph, y: Graph, sigma: Sequence[int]) -> List[Bijection]:
    """
    All bijections one friendly swap away from sigma, in X-edge order.
    """
    n = check_orders(x, y)
    sigma = validate_bijection(sigma, n)
    return [apply_swap(sigma, a, b) for a, b in x.edge_list() if y.has_edge(sigma[a], sigma[b])]


class _Expander:
    """Vectorized one-step expansion of a block of states."""

    def __init__(self, x: Graph, y: Graph):
        self.n = x.order
        self.x_edges = x.edge_list()
        self.y_adj = y.adjacency_matrix

    def __call__(self, block: Tuple[np.ndarray, np.ndarray], visited: VisitedBits) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        ranks, perms = block
        out_ranks, out_perms, out_parents = [], [], []
        for a, b in self.x_edges:
            legal = self.y_adj[perms[:, a], perms[:, b]]
            if not legal.any():
                continue
            moved = perms[legal].copy()
            moved[:, [a, b]] = moved[:, [b, a]]
            out_ranks.append(rank_many(moved))
            out_perms.append(moved)
            out_parents.append(ranks[legal])
        if not out_ranks:
            return _empty_block(self.n)
        cand = np.concatenate(out_ranks)
        fresh = ~visited.test(cand)
        cand = cand[fresh]
        uniq, first = np.unique(cand, return_index=True)
        return (uniq,
                np.concatenate(out_perms)[fresh][first],
                np.concatenate(out_parents)[fresh][first])


def _empty_block(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (np.empty(0, dtype=np.int64), np.empty((0, n), dtype=np.int8), np.empty(0, dtype=np.int64))


class _Search:
    """
    Level-synchronous BFS driver shared by the census, the connectivity
    test and the path search.
    """

    def __init__(self, x: Graph, y: Graph, config: LabConfig, threads: Optional[int] = None):
        self.n = x.order
        self.states = math.factorial(self.n)
        self.visited = VisitedBits(self.states)
        self.expand = _Expander(x, y)
        self.chunk_size = config.chunk_size
        workers = threads if threads is not None else config.threads
        self.processor = BatchProcessor(max_workers=workers, batch_size=max(1, workers) * 4)

    def _step(self, ranks: np.ndarray, perms: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        blocks = [
            (ranks[i:i + self.chunk_size], perms[i:i + self.chunk_size])
            for i in range(0, ranks.shape[0], self.chunk_size)
        ]
        parts = self.processor.map_ordered(blocks, lambda blk: self.expand(blk, self.visited))
        parts = [p for p in parts if p[0].shape[0]]
        if not parts:
            return _empty_block(self.n)
        if len(parts) == 1:
            return parts[0]
        cand = np.concatenate([p[0] for p in parts])
        uniq, first = np.unique(cand, return_index=True)
        return (uniq,
                np.concatenate([p[1] for p in parts])[first],
                np.concatenate([p[2] for p in parts])[first])

    def levels(self, seed: int):
        """
        Yield (ranks, parents) level by level from `seed`, marking as it goes.
        """
        ranks = np.array([seed], dtype=np.int64)
        perms = unrank_many(ranks, self.n)
        parents = np.array([-1], dtype=np.int64)
        self.visited.mark(ranks)
        while ranks.shape[0]:
            yield ranks, parents
            ranks, perms, parents = self._step(ranks, perms)
            self.visited.mark(ranks)


# ---------------------------------------------------------------------------
# Census
# ---------------------------------------------------------------------------

@dataclass
class ComponentReport:
    """
    Exact component census of FS(X, Y).

    sizes[i] is the size of the component whose minimum rank is
    representatives[i]; representatives ascend.
    """
    n: int
    component_count: int
    sizes: List[int]
    representatives: List[int]
    elapsed_ms: float = 0.0
    labels: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.component_count != len(self.sizes) or len(self.sizes) != len(self.representatives):
            raise ValueError("component_count, sizes and representatives disagree")

    @property
    def is_connected(self) -> bool:
        return self.component_count == 1

    def size_multiset(self) -> List[int]:
        return sorted(self.sizes)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            'n': self.n,
            'component_count': self.component_count,
            'sizes': list(self.sizes),
            'representatives': list(self.representatives),
        }
        if include_timing:
            out['elapsed_ms'] = round(self.elapsed_ms, 3)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ComponentReport':
        return cls(
            n=int(data['n']),
            component_count=int(data['component_count']),
            sizes=[int(s) for s in data['sizes']],
            representatives=[int(r) for r in data['representatives']],
            elapsed_ms=float(data.get('elapsed_ms', 0.0)),
        )


def _census(x: Graph, y: Graph, config: LabConfig, threads: Optional[int], with_labels: bool) -> ComponentReport:
    n = check_orders(x, y)
    check_instance_size(n, config, 0.125 + (4 if with_labels else 0), threads)
    start = time.perf_counter()

    search = _Search(x, y, config, threads)
    labels = np.full(search.states, -1, dtype=np.int32) if with_labels else None
    sizes: List[int] = []
    representatives: List[int] = []

    cursor = 0
    while True:
        seed = search.visited.first_clear(cursor)
        if seed < 0:
            break
        size = 0
        for ranks, _ in search.levels(seed):
            size += int(ranks.shape[0])
            if labels is not None:
                labels[ranks] = len(sizes)
        representatives.append(seed)
        sizes.append(size)
        cursor = seed + 1
        if len(sizes) % 10000 == 0:
            logger.debug(f"{len(sizes)} components so far, {search.visited.count()}/{search.states} states")

    elapsed = (time.perf_counter() - start) * 1000
    logger.info(f"Census n={n}: {len(sizes)} components over {search.states} states in {elapsed:.1f} ms")
    return ComponentReport(n, len(sizes), sizes, representatives, elapsed, labels)


def fs_components(x: Graph, y: Graph, config: Optional[LabConfig] = None, threads: Optional[int] = None) -> ComponentReport:
    """
    Exact component census of FS(x, y).

    Args:
        x: Position graph
        y: Token graph of the same order
        config: Size limits and defaults (LabConfig() when omitted)
        threads: Worker count override

    Returns:
        ComponentReport: counts, sizes and minimum-rank representatives
    """
    return _census(x, y, config or LabConfig(), threads, with_labels=False)


def fs_component_labels(x: Graph, y: Graph, config: Optional[LabConfig] = None, threads: Optional[int] = None) -> ComponentReport:
    """Census that also records the component index of every rank."""
    return _census(x, y, config or LabConfig(), threads, with_labels=True)


def fs_is_connected(x: Graph, y: Graph, config: Optional[LabConfig] = None, threads: Optional[int] = None) -> bool:
    """Single BFS from rank 0; True iff it reaches all n! states."""
    config = config or LabConfig()
    n = check_orders(x, y)
    states = check_instance_size(n, config, threads=threads)
    search = _Search(x, y, config, threads)
    reached = sum(int(ranks.shape[0]) for ranks, _ in search.levels(0))
    return reached == states


def _edge_between(before: Sequence[int], after: Sequence[int]) -> Edge:
    diff = [i for i in range(len(before)) if before[i] != after[i]]
    return normalize_edge(diff[0], diff[1])


def fs_path(x: Graph, y: Graph, sigma: Sequence[int], tau: Sequence[int],
            config: Optional[LabConfig] = None) -> Optional[List[Edge]]:
    """
    Shortest swap sequence turning sigma into tau.

    Args:
        x: Position graph
        y: Token graph
        sigma: Start bijection
        tau: Target bijection

    Returns:
        List of X-edges, [] when sigma == tau, None when tau is in
        another component
    """
    config = config or LabConfig()
    n = check_orders(x, y)
    sigma = validate_bijection(sigma, n)
    tau = validate_bijection(tau, n)
    if sigma == tau:
        return []
    check_instance_size(n, config, 0.125 + 4, threads=1)

    search = _Search(x, y, config, threads=1)
    parent = np.full(search.states, -1, dtype=np.int32)
    source, target = rank(sigma), rank(tau)
    found = False
    for ranks, parents in search.levels(source):
        if parents[0] >= 0:
            parent[ranks] = parents
        if search.visited.test(np.array([target]))[0]:
            found = True
            break
    if not found:
        return None

    chain = [target]
    while chain[-1] != source:
        chain.append(int(parent[chain[-1]]))
    chain.reverse()
    states = [unrank(r, n) for r in chain]
    return [_edge_between(a, b) for a, b in zip(states, states[1:])]


def exchangeable(x: Graph, y: Graph, sigma: Sequence[int], u: int, v: int,
                 config: Optional[LabConfig] = None) -> bool:
    """True iff sigma and (u v) o sigma lie in the same component."""
    return fs_path(x, y, sigma, transpose_tokens(sigma, u, v), config) is not None
