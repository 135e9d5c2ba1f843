"""
Graph ingestion: named spec strings, edge-list files and graph6 lines,
plus the small-graph corpora the verification harness runs over.
"""

import os
import re
import logging
from functools import lru_cache
from typing import Any, Dict, List, Tuple

import networkx as nx

from modules.errors import GraphFormatError, InvalidInputError
from modules.graph_core import Graph, NamedGraphSpec, build_named
from modules.reports import file_digest

# Configure logging
logger = logging.getLogger(__name__)

GRAPH6_HEADER = '>>graph6<<'
ATLAS_MAX_ORDER = 7

_EDGE_LIST_HEAD = re.compile(r'^\s*\d+\s+\d+\s*$')


def _content_lines(text: str) -> List[Tuple[int, str]]:
    """Non-blank, non-comment lines with 1-based line numbers."""
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith('#'):
            out.append((number, line))
    return out


def parse_edge_list(text: str) -> Graph:
    """
    Parse the "n m" header followed by m lines "u v".

    Args:
        text: File contents

    Returns:
        Graph: Parsed graph

    Raises:
        GraphFormatError: With the offending line number
    """
    lines = _content_lines(text)
    if not lines:
        raise GraphFormatError("empty edge list", 1)
    head_no, head = lines[0]
    try:
        n, m = (int(tok) for tok in head.split())
    except ValueError:
        raise GraphFormatError(f"expected header 'n m', got '{head}'", head_no)
    if n < 1:
        raise GraphFormatError(f"order must be positive, got {n}", head_no)

    body = lines[1:]
    if len(body) != m:
        line_no = body[m][0] if len(body) > m else (body[-1][0] if body else head_no)
        raise GraphFormatError(f"header announces {m} edges, found {len(body)}", line_no)

    seen = set()
    edges = []
    for line_no, line in body:
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got '{line}'", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer vertex in '{line}'", line_no)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", line_no)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex out of range 0..{n - 1} in '{line}'", line_no)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}", line_no)
        seen.add(key)
        edges.append(key)
    return Graph.from_edges(n, edges)


def parse_graph6(line: str, line_number: int = 1) -> Graph:
    """Decode one graph6 string (an optional >>graph6<< header is allowed)."""
    data = line.strip()
    if data.startswith(GRAPH6_HEADER):
        data = data[len(GRAPH6_HEADER):]
    try:
        g = nx.from_graph6_bytes(data.encode('ascii'))
    except (nx.NetworkXError, ValueError, UnicodeEncodeError) as e:
        raise GraphFormatError(f"invalid graph6 string: {e}", line_number)
    return Graph.from_networkx(g)


def to_graph6(g: Graph) -> str:
    return nx.to_graph6_bytes(g.to_networkx(), header=False).decode('ascii').strip()


def parse_graph6_text(text: str) -> List[Graph]:
    return [parse_graph6(line, number) for number, line in _content_lines(text)]


def read_graph6_file(path: str) -> List[Graph]:
    """
    Read every graph of a graph6 file, one per line.
    """
    with open(path, 'r', encoding='ascii') as f:
        graphs = parse_graph6_text(f.read())
    logger.info(f"Read {len(graphs)} graphs from {path}")
    return graphs


def parse_graph_text(text: str) -> Graph:
    """Edge-list when the first content line is 'n m', graph6 otherwise."""
    lines = _content_lines(text)
    if not lines:
        raise GraphFormatError("empty graph file", 1)
    if _EDGE_LIST_HEAD.match(lines[0][1]):
        return parse_edge_list(text)
    return parse_graph6(lines[0][1], lines[0][0])


def load_graph(spec_or_path: str) -> Tuple[Graph, Dict[str, Any]]:
    """
    Load a graph from a named spec string or a file.

    Args:
        spec_or_path: Named spec ("kbip:3,4") or path to an edge-list or
            graph6 file

    Returns:
        Tuple of the graph and an input echo for reports: {"spec": ...}
        for named graphs, {"path": ..., "sha256": ...} for files
    """
    if os.path.isfile(spec_or_path):
        with open(spec_or_path, 'r', encoding='utf-8') as f:
            text = f.read()
        g = parse_graph_text(text)
        logger.debug(f"Loaded {spec_or_path}: order {g.order}, {g.num_edges} edges")
        return g, {'path': spec_or_path, 'sha256': file_digest(spec_or_path)}

    try:
        spec = NamedGraphSpec.parse(spec_or_path)
    except InvalidInputError:
        if os.sep in spec_or_path or '.' in spec_or_path:
            raise InvalidInputError(f"no such graph file '{spec_or_path}'")
        raise
    return build_named(spec), {'spec': str(spec)}


@lru_cache(maxsize=None)
def _atlas_connected(n: int) -> Tuple[Graph, ...]:
    graphs = [
        Graph.from_networkx(g)
        for g in nx.graph_atlas_g()
        if g.number_of_nodes() == n and nx.is_connected(g)
    ]
    return tuple(graphs)


def connected_corpus(n: int) -> List[Graph]:
    """
    All connected graphs on n vertices up to isomorphism.

    Ordered by edge count, then degree sequence, then automorphism count,
    which is the fixed order of the networkx graph atlas.
    """
    if not 1 <= n <= ATLAS_MAX_ORDER:
        raise InvalidInputError(
            f"built-in corpus covers 1..{ATLAS_MAX_ORDER} vertices; supply a graph6 file for n={n}"
        )
    return list(_atlas_connected(n))
