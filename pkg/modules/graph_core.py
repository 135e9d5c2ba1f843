"""
Simple-graph representation and the structural predicates the
connectivity theorems consume.
Graphs are immutable; every function here is a pure function of its
arguments and safe to call from concurrent workers.
"""

import re
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from modules.errors import InvalidInputError

# Configure logging
logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """
    Simple undirected graph on the vertex set {0..order-1}.

    Build instances through Graph.from_edges, which validates and
    normalizes the edge list; the constructor expects normalized edges.
    """
    order: int
    edges: FrozenSet[Edge]

    def __post_init__(self):
        if self.order < 1:
            raise InvalidInputError(f"graph order must be at least 1, got {self.order}")
        for u, v in self.edges:
            if not (0 <= u < v < self.order):
                raise InvalidInputError(f"edge ({u},{v}) invalid for order {self.order}")

    @classmethod
    def from_edges(cls, order: int, edges: Iterable[Sequence[int]]) -> 'Graph':
        """
        Create a graph, rejecting loops, duplicates and out-of-range ends.

        Args:
            order: Number of vertices
            edges: Pairs of vertex labels in any orientation

        Returns:
            Graph: The validated graph
        """
        seen: Set[Edge] = set()
        for pair in edges:
            u, v = int(pair[0]), int(pair[1])
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            if not (0 <= u < order and 0 <= v < order):
                raise InvalidInputError(f"edge ({u},{v}) out of range for order {order}")
            e = normalize_edge(u, v)
            if e in seen:
                raise InvalidInputError(f"duplicate edge ({e[0]},{e[1]})")
            seen.add(e)
        return cls(order, frozenset(seen))

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> 'Graph':
        mapping = {node: i for i, node in enumerate(sorted(g.nodes()))}
        return cls.from_edges(len(mapping), ((mapping[u], mapping[v]) for u, v in g.edges()))

    @cached_property
    def adjacency(self) -> Tuple[FrozenSet[int], ...]:
        nbrs: List[Set[int]] = [set() for _ in range(self.order)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def sorted_adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(sorted(s)) for s in self.adjacency)

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.order, self.order), dtype=bool)
        for u, v in self.edges:
            mat[u, v] = True
            mat[v, u] = True
        mat.setflags(write=False)
        return mat

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.sorted_adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> List[int]:
        return [len(s) for s in self.adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def edge_list(self) -> List[Edge]:
        return sorted(self.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.order))
        g.add_edges_from(self.edge_list())
        return g

    def with_edge(self, u: int, v: int) -> 'Graph':
        if u == v or self.has_edge(u, v):
            raise InvalidInputError(f"cannot add edge ({u},{v})")
        return Graph(self.order, self.edges | {normalize_edge(u, v)})

    def without_edge(self, u: int, v: int) -> 'Graph':
        if not self.has_edge(u, v):
            raise InvalidInputError(f"edge ({u},{v}) not present")
        return Graph(self.order, self.edges - {normalize_edge(u, v)})

    def subdivide(self, u: int, v: int, times: int = 1) -> 'Graph':
        """
        Replace edge uv by a path through `times` fresh vertices.

        The new vertices are labelled order, order+1, ... from u towards v.
        """
        if times < 0:
            raise InvalidInputError("subdivision count must be non-negative")
        if times == 0:
            return self
        base = self.without_edge(u, v)
        chain = [u] + list(range(self.order, self.order + times)) + [v]
        new_edges = set(base.edges)
        new_edges.update(normalize_edge(a, b) for a, b in zip(chain, chain[1:]))
        return Graph(self.order + times, frozenset(new_edges))

    def __repr__(self) -> str:
        return f"Graph(order={self.order}, edges={self.edge_list()})"


# ---------------------------------------------------------------------------
# Named graphs
# ---------------------------------------------------------------------------

NAMED_KINDS = ('cycle', 'kbip', 'star', 'starplus', 'complete', 'theta', 'path', 'wheel')

_SPEC_PATTERN = re.compile(r'^(?P<kind>[a-z]+)(?::(?P<args>[0-9,\s]+))?$')


@dataclass(frozen=True)
class NamedGraphSpec:
    """
    A named graph family plus its parameters.

    CompleteBipartite parameters are normalized to s <= t on construction.
    """
    kind: str
    params: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in NAMED_KINDS:
            raise InvalidInputError(f"unknown graph kind '{self.kind}'")
        expected = {'kbip': 2, 'theta': 0}.get(self.kind, 1)
        if len(self.params) != expected:
            if self.kind == 'theta':
                raise InvalidInputError("theta takes no size argument")
            raise InvalidInputError(f"'{self.kind}' expects {expected} parameter(s), got {len(self.params)}")
        if self.kind == 'kbip':
            s, t = sorted(self.params)
            if s == 0:
                raise InvalidInputError("complete bipartite graph needs two non-empty sides")
            object.__setattr__(self, 'params', (s, t))

    @classmethod
    def parse(cls, text: str) -> 'NamedGraphSpec':
        """
        Parse strings such as "cycle:9", "kbip:2,7" or "theta".
        """
        match = _SPEC_PATTERN.match(text.strip().lower())
        if not match:
            raise InvalidInputError(f"malformed graph spec '{text}'")
        args = match.group('args')
        params = tuple(int(a) for a in args.split(',') if a.strip()) if args else ()
        return cls(match.group('kind'), params)

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:{','.join(str(p) for p in self.params)}"


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidInputError(f"cycle needs at least 3 vertices, got {n}")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def complete_bipartite(s: int, t: int) -> Graph:
    """K_{s,t} with parts {0..s-1} and {s..s+t-1}."""
    if s < 1 or t < 1:
        raise InvalidInputError("complete bipartite graph needs two non-empty sides")
    return Graph.from_edges(s + t, ((i, j) for i in range(s) for j in range(s, s + t)))


def star_graph(n: int) -> Graph:
    """K_{1,n-1} with center 0."""
    if n < 2:
        raise InvalidInputError(f"star needs at least 2 vertices, got {n}")
    return complete_bipartite(1, n - 1)


def star_plus_graph(n: int) -> Graph:
    """The star on n vertices plus the edge between leaves 1 and 2."""
    if n < 4:
        raise InvalidInputError(f"starplus needs at least 4 vertices, got {n}")
    return star_graph(n).with_edge(1, 2)


def wheel_graph(n: int) -> Graph:
    """Hub 0 joined to every vertex of the rim cycle 1..n-1."""
    if n < 4:
        raise InvalidInputError(f"wheel needs at least 4 vertices, got {n}")
    rim = [(i, i % (n - 1) + 1) for i in range(1, n)]
    return Graph.from_edges(n, [(0, i) for i in range(1, n)] + rim)


def theta_graph() -> Graph:
    """Hexagon 0-1-2-3-4-5-0 plus vertex 6 adjacent to 0 and 3."""
    return Graph.from_edges(7, [(i, (i + 1) % 6) for i in range(6)] + [(6, 0), (6, 3)])


def augmented_bipartite(k: int, n: int) -> Graph:
    """
    K_{k,n-k} plus the edges 0-1, ..., 0-(k-1) inside the small side.
    """
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"need 1 <= k < n, got k={k}, n={n}")
    extra = [(0, i) for i in range(1, k)]
    return Graph.from_edges(n, complete_bipartite(k, n - k).edge_list() + extra)


def build_named(spec: NamedGraphSpec) -> Graph:
    """
    Build the canonical labelled graph for a named spec.

    Args:
        spec: Parsed named graph

    Returns:
        Graph: The constructed graph
    """
    p = spec.params
    builders = {
        'cycle': lambda: cycle_graph(p[0]),
        'kbip': lambda: complete_bipartite(p[0], p[1]),
        'star': lambda: star_graph(p[0]),
        'starplus': lambda: star_plus_graph(p[0]),
        'complete': lambda: complete_graph(p[0]),
        'path': lambda: path_graph(p[0]),
        'wheel': lambda: wheel_graph(p[0]),
        'theta': theta_graph,
    }
    return builders[spec.kind]()


def parse_named(text: str) -> Graph:
    return build_named(NamedGraphSpec.parse(text))


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteCheck:
    bipartite: bool
    parts: Optional[Tuple[FrozenSet[int], FrozenSet[int]]] = None
    odd_walk: Optional[Tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.bipartite


def _bfs_tree(g: Graph, root: int, parent: Dict[int, int], depth: Dict[int, int]) -> List[int]:
    parent[root] = -1
    depth[root] = 0
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w not in depth:
                depth[w] = depth[u] + 1
                parent[w] = u
                order.append(w)
                queue.append(w)
    return order


def _tree_path(parent: Dict[int, int], v: int) -> List[int]:
    path = [v]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return path


def is_bipartite(g: Graph) -> BipartiteCheck:
    """
    Two-colour g by BFS.

    Returns:
        BipartiteCheck: the two colour classes when bipartite, otherwise an
        odd closed walk root..a, b..root through a monochromatic edge ab
    """
    parent: Dict[int, int] = {}
    depth: Dict[int, int] = {}
    for root in range(g.order):
        if root in depth:
            continue
        component = _bfs_tree(g, root, parent, depth)
        for a in component:
            for b in g.neighbors(a):
                if a < b and depth[a] % 2 == depth[b] % 2:
                    walk = list(reversed(_tree_path(parent, a))) + _tree_path(parent, b)
                    return BipartiteCheck(False, odd_walk=tuple(walk))
    even = frozenset(v for v in range(g.order) if depth[v] % 2 == 0)
    odd = frozenset(range(g.order)) - even
    return BipartiteCheck(True, parts=(even, odd))


def is_connected(g: Graph) -> bool:
    depth: Dict[int, int] = {}
    _bfs_tree(g, 0, {}, depth)
    return len(depth) == g.order


def is_connected_subset(g: Graph, vertices: Iterable[int]) -> bool:
    """True iff the subgraph induced on `vertices` is connected."""
    vs = set(vertices)
    if not vs:
        return True
    start = min(vs)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in g.adjacency[u]:
            if w in vs and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vs


def vertex_connectivity(g: Graph) -> int:
    """
    Size of a minimum vertex cut; order-1 for complete graphs.

    Disconnected graphs and the single vertex give 0.
    """
    if g.order <= 1 or not is_connected(g):
        return 0
    return nx.node_connectivity(g.to_networkx(), flow_func=edmonds_karp)


def is_k_connected(g: Graph, k: int) -> bool:
    """
    Test vertex_connectivity(g) >= k without the full flow computation
    when a cheaper check decides it.
    """
    if k <= 0:
        return True
    if not is_connected(g):
        return False
    if k == 1:
        return g.order >= 2
    if k == 2 and g.order >= 3:
        return nx.is_biconnected(g.to_networkx())
    return vertex_connectivity(g) >= k


@dataclass(frozen=True)
class BridgePath:
    """
    A non-trivial k-bridge: a path of bridges whose internal vertices have
    degree 2 and whose end vertices have degree at least 2.
    """
    vertices: Tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.vertices)


def _bridge_chains(g: Graph) -> List[List[int]]:
    """Maximal chains of cut edges through degree-2 vertices."""
    chains: List[List[int]] = []
    used: Set[Edge] = set()
    for u, v in sorted(normalize_edge(a, b) for a, b in nx.bridges(g.to_networkx())):
        if (u, v) in used:
            continue
        chain = [u, v]
        # grow past degree-2 vertices on both ends
        for _ in range(2):
            while g.degree(chain[-1]) == 2:
                nxt = next(w for w in g.neighbors(chain[-1]) if w != chain[-2])
                chain.append(nxt)
            chain.reverse()
        if chain[0] > chain[-1]:
            chain.reverse()
        used.update(normalize_edge(a, b) for a, b in zip(chain, chain[1:]))
        chains.append(chain)
    return chains


def find_nontrivial_k_bridge(g: Graph, k: int) -> Optional[BridgePath]:
    """
    Find a non-trivial k-bridge of a connected graph.

    Args:
        g: Connected host graph
        k: Number of vertices on the bridge path (k >= 2)

    Returns:
        BridgePath or None when g has no such path
    """
    if k < 2:
        raise InvalidInputError(f"k-bridge needs k >= 2, got {k}")
    if not is_connected(g):
        raise InvalidInputError("k-bridges are only defined in connected graphs")
    for chain in _bridge_chains(g):
        lo = 0 if g.degree(chain[0]) >= 2 else 1
        hi = len(chain) - 1 if g.degree(chain[-1]) >= 2 else len(chain) - 2
        if hi - lo + 1 >= k:
            return BridgePath(tuple(chain[lo:lo + k]))
    return None


def has_nontrivial_cut_edge(g: Graph) -> bool:
    """A cut edge neither of whose endpoints is a leaf."""
    return any(
        g.degree(u) >= 2 and g.degree(v) >= 2
        for u, v in nx.bridges(g.to_networkx())
    )


def _odd_girth(g: Graph) -> Optional[int]:
    best: Optional[int] = None
    for root in range(g.order):
        depth: Dict[int, int] = {}
        _bfs_tree(g, root, {}, depth)
        for a, b in g.edges:
            if a in depth and depth[a] == depth.get(b):
                length = 2 * depth[a] + 1
                if best is None or length < best:
                    best = length
        if best == 3:
            break
    return best


def _bounded_distances(g: Graph, source: int, floor: int) -> Dict[int, int]:
    depth = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w >= floor and w not in depth:
                depth[w] = depth[u] + 1
                queue.append(w)
    return depth


def shortest_odd_cycle(g: Graph) -> Optional[List[int]]:
    """
    A minimum-length odd cycle, or None when g is bipartite.

    Among cycles of that length the lexicographically smallest canonical
    sequence is returned: it starts at its smallest vertex and its second
    vertex is smaller than its last.
    """
    length = _odd_girth(g)
    if length is None:
        return None
    for s in range(g.order):
        dist = _bounded_distances(g, s, s)
        path = [s]
        on_path = {s}

        def extend() -> bool:
            v = path[-1]
            if len(path) == length:
                return g.has_edge(v, s) and path[1] < path[-1]
            remaining = length - len(path)
            for w in g.neighbors(v):
                if w <= s or w in on_path or dist.get(w, length) > remaining:
                    continue
                path.append(w)
                on_path.add(w)
                if extend():
                    return True
                path.pop()
                on_path.discard(w)
            return False

        if extend():
            return path
    raise AssertionError("odd girth found but no odd cycle realizes it")


def shortest_path_between(g: Graph,
                          sources: Iterable[int],
                          targets: Iterable[int],
                          avoid: Iterable[int] = ()) -> Optional[List[int]]:
    """
    Shortest path x1..xp with x1 in sources and xp in targets.

    Ties resolve towards smaller vertex labels. Interior vertices avoid
    sources, targets and `avoid`.
    """
    target_set = set(targets)
    blocked = set(avoid)
    start = sorted(set(sources) - blocked)
    for s in start:
        if s in target_set:
            return [s]
    parent: Dict[int, int] = {s: -1 for s in start}
    queue = deque(start)
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w in parent or w in blocked:
                continue
            parent[w] = u
            if w in target_set:
                return list(reversed(_tree_path(parent, w)))
            queue.append(w)
    return None


def shortest_cycle_through_edge(g: Graph, e: Sequence[int]) -> Optional[List[int]]:
    """
    Shortest cycle containing edge e, listed as [e[0], e[1], ...].

    Returns None when e is a cut edge.
    """
    a, b = int(e[0]), int(e[1])
    if not (0 <= a < g.order and 0 <= b < g.order) or not g.has_edge(a, b):
        raise InvalidInputError(f"edge ({a},{b}) is not in the graph")
    parent: Dict[int, int] = {b: -1}
    queue = deque([b])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if (u == b and w == a) or w in parent:
                continue
            parent[w] = u
            if w == a:
                back = list(reversed(_tree_path(parent, a)))
                return [a] + back[:-1]
            queue.append(w)
    return None


def is_cycle_graph(g: Graph) -> bool:
    return g.order >= 3 and all(d == 2 for d in g.degrees()) and is_connected(g)


_THETA_DEGREES = [2, 2, 2, 2, 2, 3, 3]


def is_theta(g: Graph) -> bool:
    """Isomorphism test against the exceptional 7-vertex graph."""
    if g.order != 7 or g.num_edges != 8 or sorted(g.degrees()) != _THETA_DEGREES:
        return False
    return nx.is_isomorphic(g.to_networkx(), theta_graph().to_networkx())
