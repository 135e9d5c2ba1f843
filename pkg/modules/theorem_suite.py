"""
Connectivity predictions for FS(K_{k,n-k}, Y), the closed-form component
count for cycles, and cross-validation of both against the exhaustive
oracle.

Predictions:
- k = 1 (star): exact characterisation, never Unknown
- k = 2: exact characterisation, never Unknown (n = 4 goes to the oracle)
- k >= 3: sufficient condition plus obstructions, Unknown in between
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from modules.batch_processing import BatchProcessor, ProgressCallback
from modules.cache import CensusCache, cache_census
from modules.config import LabConfig
from modules.errors import InvalidInputError
from modules.fs_core import (
    check_orders, fs_component_labels, fs_components, rank_many, unrank_many,
)
from modules.graph_core import (
    Graph, complete_bipartite, find_nontrivial_k_bridge, has_nontrivial_cut_edge, is_bipartite,
    is_connected, is_cycle_graph, is_k_connected, is_theta, star_graph,
)
from modules.graph_io import connected_corpus, to_graph6

# Configure logging
logger = logging.getLogger(__name__)

CONNECTED = 'Connected'
DISCONNECTED = 'Disconnected'
UNKNOWN = 'Unknown'

# Reason tags
NOT_CONNECTED = 'NotConnected'
NOT_TWO_CONNECTED = 'NotTwoConnected'
BIPARTITE = 'Bipartite'
IS_CYCLE = 'IsCycle'
THETA_EXCEPTION = 'ThetaException'
ORACLE_CENSUS = 'OracleCensus'
WILSON_CRITERIA = 'WilsonCriteria'
NO_NONTRIVIAL_CUT_EDGE = 'NoNonTrivialCutEdge'
K_MINUS_1_CONNECTED = 'KMinus1ConnectedSufficient'


def nontrivial_k_bridge_tag(k: int) -> str:
    return f"NonTrivialKBridge({k})"


@dataclass
class Prediction:
    verdict: str
    reasons: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in (CONNECTED, DISCONNECTED, UNKNOWN):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == DISCONNECTED and not self.reasons:
            raise ValueError("a Disconnected prediction needs at least one reason")
        if self.verdict == UNKNOWN and self.reasons:
            raise ValueError("an Unknown prediction carries no reasons")

    @property
    def decided(self) -> bool:
        return self.verdict != UNKNOWN

    def to_dict(self) -> Dict[str, Any]:
        return {'verdict': self.verdict, 'reasons': list(self.reasons)}


# ---------------------------------------------------------------------------
# Oracle access
# ---------------------------------------------------------------------------

def oracle_census(x: Graph, y: Graph, config: Optional[LabConfig] = None,
                  cache: Optional[CensusCache] = None, threads: Optional[int] = None,
                  force_refresh: bool = False) -> Dict[str, Any]:
    """
    Component census of FS(x, y) as a timing-free dict, served from
    `cache` when one is given.

    Args:
        x: Position graph
        y: Token graph
        config: Size limits
        cache: Optional CensusCache
        threads: Worker count for the census
        force_refresh: Recompute and overwrite the cached entry

    Returns:
        dict: n, component_count, sizes, representatives
    """
    config = config or LabConfig()

    @cache_census(cache, 'census')
    def compute(x_key: str, y_key: str) -> Dict[str, Any]:
        return fs_components(x, y, config, threads).to_dict(include_timing=False)

    return compute(to_graph6(x), to_graph6(y), force_refresh=force_refresh)


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------

def predict_star(y: Graph) -> Prediction:
    """
    Exact connectivity verdict for FS(K_{1,n-1}, y).

    Connected iff y is 2-connected, non-bipartite, not a cycle and not Θ.
    """
    if y.order < 3:
        raise InvalidInputError(f"star prediction needs n >= 3, got {y.order}")
    reasons: List[str] = []
    if not is_connected(y):
        reasons.append(NOT_CONNECTED)
    elif not is_k_connected(y, 2):
        reasons.append(NOT_TWO_CONNECTED)
    if is_bipartite(y):
        reasons.append(BIPARTITE)
    if is_cycle_graph(y):
        reasons.append(IS_CYCLE)
    if y.order == 7 and is_theta(y):
        reasons.append(THETA_EXCEPTION)
    if reasons:
        return Prediction(DISCONNECTED, reasons)
    return Prediction(CONNECTED, [WILSON_CRITERIA])


def predict_k_disconnect(y: Graph, k: int) -> Optional[Prediction]:
    """
    Disconnection obstructions for FS(K_{k,n-k}, y), k >= 2.

    Returns:
        Disconnected prediction listing every obstruction found, or None
    """
    if k < 2:
        raise InvalidInputError(f"k must be at least 2, got {k}")
    if y.order < 2 * k:
        raise InvalidInputError(f"needs n >= 2k, got n={y.order}, k={k}")
    reasons: List[str] = []
    connected = is_connected(y)
    if not connected:
        reasons.append(NOT_CONNECTED)
    if is_bipartite(y):
        reasons.append(BIPARTITE)
    if connected and find_nontrivial_k_bridge(y, k) is not None:
        reasons.append(nontrivial_k_bridge_tag(k))
    if is_cycle_graph(y):
        reasons.append(IS_CYCLE)
    return Prediction(DISCONNECTED, reasons) if reasons else None


def predict_k2(y: Graph, config: Optional[LabConfig] = None,
               cache: Optional[CensusCache] = None) -> Prediction:
    """
    Exact connectivity verdict for FS(K_{2,n-2}, y).

    At n = 4 the answer comes from the oracle on K_{2,2}; above that y must
    be connected, non-bipartite, free of non-trivial cut edges and not a
    cycle.
    """
    n = y.order
    if n < 4:
        raise InvalidInputError(f"k=2 prediction needs n >= 4, got {n}")
    if n == 4:
        census = oracle_census(complete_bipartite(2, 2), y, config, cache)
        verdict = CONNECTED if census['component_count'] == 1 else DISCONNECTED
        return Prediction(verdict, [ORACLE_CENSUS])
    obstruction = predict_k_disconnect(y, 2)
    if obstruction is not None:
        return obstruction
    return Prediction(CONNECTED, [NO_NONTRIVIAL_CUT_EDGE])


def predict_kk(y: Graph, k: int) -> Prediction:
    """
    Verdict for FS(K_{k,n-k}, y), k >= 3.

    Connected when y is (k-1)-connected, non-bipartite and not a cycle;
    Disconnected on an obstruction; Unknown otherwise.
    """
    if k < 3:
        raise InvalidInputError(f"predict_kk needs k >= 3, got {k}")
    obstruction = predict_k_disconnect(y, k)
    if obstruction is not None:
        return obstruction
    if is_k_connected(y, k - 1):
        return Prediction(CONNECTED, [K_MINUS_1_CONNECTED])
    return Prediction(UNKNOWN)


def predict(y: Graph, k: int, config: Optional[LabConfig] = None,
            cache: Optional[CensusCache] = None) -> Prediction:
    """Dispatch on k: star for k = 1, exact for k = 2, partial for k >= 3."""
    if k < 1 or 2 * k > y.order:
        raise InvalidInputError(f"need 1 <= k <= n-k, got k={k}, n={y.order}")
    if k == 1:
        return predict_star(y)
    if k == 2:
        return predict_k2(y, config, cache)
    return predict_kk(y, k)


def cycle_formula(n: int, k: int) -> int:
    """(k-1)! (n-k-1)!, the number of pairs of cyclic orderings of the two sides."""
    if not 1 <= k <= n - k:
        raise InvalidInputError(f"need 1 <= k <= n-k, got k={k}, n={n}")
    return math.factorial(k - 1) * math.factorial(n - k - 1)


def cycle_census(n: int, k: int) -> int:
    """
    Exact component count of FS(C_n, K_{k,n-k}): gcd(n, k) components per
    pair of cyclic orderings.

    Reading the small and big tokens from position 0 gives two rotations
    of the fixed cyclic orders. A swap across the edge (n-1, 0) turns the
    small rotation one step forward and the big rotation one step back, so
    their sum modulo gcd(k, n-k) is constant on components; every other
    swap leaves both rotations alone. Arrangements of the two sides along
    the cycle are all mutually reachable, so each residue is one component.
    """
    return math.gcd(n, k) * cycle_formula(n, k)


def cycle_formula_applies(n: int, k: int) -> bool:
    """Whether cycle_formula alone is the exact census, i.e. gcd(n, k) = 1."""
    return math.gcd(n, k) == 1


# ---------------------------------------------------------------------------
# Corpus verification
# ---------------------------------------------------------------------------

@dataclass
class CorpusComparison:
    instance_id: str
    predicted: Prediction
    oracle_connected: bool
    oracle_components: int
    mismatch: bool
    consistent: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'instance_id': self.instance_id,
            'predicted': self.predicted.to_dict(),
            'oracle_connected': self.oracle_connected,
            'oracle_components': self.oracle_components,
            'mismatch': self.mismatch,
            'consistent': self.consistent,
        }


def compare_instance(y: Graph, k: int, config: Optional[LabConfig] = None,
                     cache: Optional[CensusCache] = None) -> CorpusComparison:
    """Prediction and oracle census for one token graph y."""
    n = y.order
    prediction = predict(y, k, config, cache)
    census = oracle_census(complete_bipartite(k, n - k), y, config, cache, threads=1)
    count = int(census['component_count'])
    oracle_connected = count == 1
    mismatch = prediction.decided and (prediction.verdict == CONNECTED) != oracle_connected
    consistent = None
    if IS_CYCLE in prediction.reasons:
        consistent = count == cycle_census(n, k)
    return CorpusComparison(to_graph6(y), prediction, oracle_connected, count, mismatch, consistent)


def verify_corpus(n: int, k: int, corpus: Optional[List[Graph]] = None,
                  config: Optional[LabConfig] = None, cache: Optional[CensusCache] = None,
                  progress: Optional[ProgressCallback] = None,
                  threads: Optional[int] = None) -> List[CorpusComparison]:
    """
    Compare predictions with the oracle on every graph of a corpus.

    Args:
        n: Order of the corpus graphs
        k: Small side size of the position graph K_{k,n-k}
        corpus: Graphs to check (all connected graphs on n vertices when
            omitted)
        config: Size limits and default worker count
        cache: Optional census cache
        progress: Optional callback(done, total, fraction)
        threads: Worker count override

    Returns:
        List[CorpusComparison] in corpus order
    """
    config = config or LabConfig()
    if not 1 <= k <= n - k:
        raise InvalidInputError(f"need 1 <= k <= n-k, got k={k}, n={n}")
    graphs = connected_corpus(n) if corpus is None else list(corpus)
    for i, g in enumerate(graphs):
        if g.order != n:
            raise InvalidInputError(f"corpus graph {i} has order {g.order}, expected {n}")

    processor = BatchProcessor(max_workers=threads or config.threads)
    logger.info(f"Verifying {len(graphs)} graphs on {n} vertices against K_{{{k},{n - k}}}")
    comparisons = processor.map_ordered(graphs, lambda g: compare_instance(g, k, config, cache), progress)

    mismatches = [c for c in comparisons if c.mismatch]
    for c in mismatches:
        logger.warning(f"Mismatch on {c.instance_id}: predicted {c.predicted.verdict}, "
                       f"oracle {c.oracle_components} components")
    logger.info(f"Verified {len(comparisons)} graphs, {len(mismatches)} mismatches")
    return comparisons


# ---------------------------------------------------------------------------
# Conjecture scan
# ---------------------------------------------------------------------------

@dataclass
class ConjectureReport:
    n_max: int
    k: int
    k_bridge_checked: List[str] = field(default_factory=list)
    k_bridge_resolved: List[Dict[str, Any]] = field(default_factory=list)
    k_bridge_violations: List[Dict[str, Any]] = field(default_factory=list)
    two_component_checked: List[Dict[str, Any]] = field(default_factory=list)
    two_component_violations: List[Dict[str, Any]] = field(default_factory=list)
    star_bipartite_counts: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return len(self.k_bridge_violations) + len(self.two_component_violations)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_max': self.n_max,
            'k': self.k,
            'k_bridge_conjecture': {
                'checked': list(self.k_bridge_checked),
                'unknown_resolved': list(self.k_bridge_resolved),
                'violations': list(self.k_bridge_violations),
            },
            'two_component_conjecture': {
                'checked': list(self.two_component_checked),
                'violations': list(self.two_component_violations),
            },
            'star_bipartite_counts': list(self.star_bipartite_counts),
        }


def conjectured_connected(y: Graph, k: int) -> bool:
    """Connected, non-bipartite, no non-trivial k-bridge, not a cycle."""
    if not is_connected(y) or is_bipartite(y) or is_cycle_graph(y):
        return False
    return find_nontrivial_k_bridge(y, k) is None


def two_component_candidate(y: Graph) -> bool:
    """Connected bipartite y on n >= 5 vertices, no non-trivial cut edge, not a cycle."""
    return (y.order >= 5 and is_connected(y) and bool(is_bipartite(y))
            and not has_nontrivial_cut_edge(y) and not is_cycle_graph(y))


def scan_conjectures(n_max: int, k: int, config: Optional[LabConfig] = None,
                     cache: Optional[CensusCache] = None,
                     corpus_loader: Callable[[int], List[Graph]] = connected_corpus,
                     threads: Optional[int] = None) -> ConjectureReport:
    """
    Check the open conjectures against the oracle on every connected graph
    up to n_max vertices.

    For k >= 3 every Unknown prediction is resolved by the oracle and
    tested against the conjectured characterisation (connected,
    non-bipartite, no non-trivial k-bridge, not a cycle). Independently,
    every connected bipartite graph on 5..n_max vertices with no
    non-trivial cut edge that is not a cycle must give exactly two
    components against K_{2,n-2}. Star censuses of 2-connected bipartite
    graphs are recorded without any assertion.

    Args:
        n_max: Largest order scanned
        k: Small side size for the k-bridge conjecture
        config: Size limits
        cache: Optional census cache
        corpus_loader: Source of graphs per order
        threads: Worker count override

    Returns:
        ConjectureReport
    """
    config = config or LabConfig()
    report = ConjectureReport(n_max=n_max, k=k)
    processor = BatchProcessor(max_workers=threads or config.threads)

    if k >= 3:
        for n in range(2 * k, n_max + 1):
            unknown = [y for y in corpus_loader(n) if not predict_kk(y, k).decided]
            x = complete_bipartite(k, n - k)
            censuses = processor.map_ordered(unknown, lambda y: oracle_census(x, y, config, cache, threads=1))
            for y, census in zip(unknown, censuses):
                gid = to_graph6(y)
                report.k_bridge_checked.append(gid)
                oracle_connected = census['component_count'] == 1
                conjectured = conjectured_connected(y, k)
                record = {'instance_id': gid, 'n': n, 'oracle_components': census['component_count'],
                          'conjectured_connected': conjectured}
                report.k_bridge_resolved.append(record)
                if oracle_connected != conjectured:
                    logger.warning(f"k-bridge conjecture violated by {gid} (k={k})")
                    report.k_bridge_violations.append(record)

    for n in range(5, n_max + 1):
        graphs = corpus_loader(n)
        candidates = [y for y in graphs if two_component_candidate(y)]
        x = complete_bipartite(2, n - 2)
        censuses = processor.map_ordered(candidates, lambda y: oracle_census(x, y, config, cache, threads=1))
        for y, census in zip(candidates, censuses):
            record = {'instance_id': to_graph6(y), 'n': n, 'oracle_components': census['component_count']}
            report.two_component_checked.append(record)
            if census['component_count'] != 2:
                logger.warning(f"two-component conjecture violated by {record['instance_id']}")
                report.two_component_violations.append(record)

        star = star_graph(n)
        bipartite_2c = [y for y in graphs if is_bipartite(y) and is_k_connected(y, 2)]
        censuses = processor.map_ordered(bipartite_2c, lambda y: oracle_census(star, y, config, cache, threads=1))
        for y, census in zip(bipartite_2c, censuses):
            report.star_bipartite_counts.append(
                {'instance_id': to_graph6(y), 'n': n, 'oracle_components': census['component_count']})

    logger.info(f"Conjecture scan up to n={n_max}: {len(report.k_bridge_checked)} unknown instances, "
                f"{len(report.two_component_checked)} two-component candidates, {report.violations} violations")
    return report


# ---------------------------------------------------------------------------
# Exchangeability reduction
# ---------------------------------------------------------------------------

@dataclass
class ExchangeReduction:
    hypothesis_holds: bool
    components_y: int
    components_y_tilde: int
    failures: int = 0
    witness: Optional[Dict[str, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'hypothesis_holds': self.hypothesis_holds,
            'components_y': self.components_y,
            'components_y_tilde': self.components_y_tilde,
            'failures': self.failures,
            'witness': self.witness,
        }


def check_exchange_reduction(x: Graph, y: Graph, y_tilde: Graph,
                             config: Optional[LabConfig] = None) -> ExchangeReduction:
    """
    Test the exchangeability hypothesis for a supergraph y_tilde of y.

    The hypothesis holds when, for every edge uv of y_tilde and every
    bijection placing u and v on an X-edge, (u v) o sigma lies in the same
    FS(x, y) component as sigma. When it holds the two censuses must agree.

    Args:
        x: Position graph
        y: Token graph
        y_tilde: Spanning supergraph of y
        config: Size limits

    Returns:
        ExchangeReduction with both component counts
    """
    n = check_orders(x, y)
    check_orders(x, y_tilde)
    if not y.edges <= y_tilde.edges:
        raise InvalidInputError("y must be a spanning subgraph of y_tilde")

    labelled = fs_component_labels(x, y, config)
    labels = labelled.labels
    perms = unrank_many(np.arange(labels.shape[0], dtype=np.int64), n).astype(np.int64)
    positions = np.argsort(perms, axis=1)
    adjacency = x.adjacency_matrix
    rows = np.arange(perms.shape[0])

    failures = 0
    witness: Optional[Dict[str, int]] = None
    for u, v in sorted(y_tilde.edges - y.edges):
        pu, pv = positions[:, u], positions[:, v]
        on_edge = adjacency[pu, pv]
        if not on_edge.any():
            continue
        idx = rows[on_edge]
        swapped = perms[idx].copy()
        swapped[np.arange(idx.shape[0]), pu[idx]] = v
        swapped[np.arange(idx.shape[0]), pv[idx]] = u
        bad = labels[rank_many(swapped)] != labels[idx]
        count = int(bad.sum())
        if count and witness is None:
            witness = {'rank': int(idx[bad][0]), 'u': int(u), 'v': int(v)}
        failures += count

    components_tilde = oracle_census(x, y_tilde, config)['component_count']
    result = ExchangeReduction(failures == 0, labelled.component_count, int(components_tilde), failures, witness)
    logger.info(f"Exchange reduction: hypothesis {'holds' if result.hypothesis_holds else 'fails'} "
                f"({result.components_y} vs {result.components_y_tilde} components)")
    return result
