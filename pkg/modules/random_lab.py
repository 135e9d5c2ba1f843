"""
Monte-Carlo sweeps of Pr[FS(K_{k,n-k}, G(n,p)) is connected] over a grid
of edge probabilities.

Each (p-index, trial) pair draws from its own numpy stream spawned from
the root seed, so a sweep gives the same numbers for any worker count.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from modules.batch_processing import BatchProcessor, ProgressCallback
from modules.config import LabConfig
from modules.errors import InvalidInputError
from modules.fs_core import check_instance_size, fs_is_connected
from modules.graph_core import Graph, complete_bipartite, is_connected
from modules.theorem_suite import CONNECTED, DISCONNECTED, UNKNOWN, predict

# Configure logging
logger = logging.getLogger(__name__)

PREDICATE = 'predicate'
ORACLE = 'oracle'
DECISIONS = (PREDICATE, ORACLE)

FRAME_COLUMNS = ['p', 'trials', 'connected', 'disconnected', 'unknown', 'estimate', 'stderr']


def sample_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """
    Draw G(n, p): every pair i < j is an edge independently with
    probability p.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise InvalidInputError(f"order must be positive, got {n}")
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.shape[0]) < p
    return Graph.from_edges(n, zip(rows[keep].tolist(), cols[keep].tolist()))


def trial_rng(seed: int, p_index: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, keyed by its grid position."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(p_index, trial)))


def threshold_grid(n: int, factors: Sequence[float]) -> List[float]:
    """Probabilities c * ln(n) / n for each factor c, ascending and capped at 1."""
    if n < 2:
        raise InvalidInputError(f"threshold grid needs n >= 2, got {n}")
    base = math.log(n) / n
    return sorted(min(1.0, max(0.0, float(c) * base)) for c in factors)


def random_connected_corpus(n: int, count: int, seed: int, p: float = 0.5) -> List[Graph]:
    """
    Rejection-sample `count` connected G(n, p) graphs.

    Args:
        n: Order
        count: Number of graphs
        seed: Root seed
        p: Edge probability

    Returns:
        List[Graph], deterministic in seed
    """
    rng = np.random.default_rng(seed)
    graphs: List[Graph] = []
    attempts = 0
    limit = 1000 * max(count, 1)
    while len(graphs) < count:
        if attempts >= limit:
            raise InvalidInputError(f"only {len(graphs)} connected graphs in {attempts} draws at n={n}, p={p}")
        attempts += 1
        g = sample_gnp(n, p, rng)
        if is_connected(g):
            graphs.append(g)
    logger.debug(f"Sampled {count} connected graphs on {n} vertices in {attempts} draws")
    return graphs


@dataclass
class SweepConfig:
    """
    One sweep: n, k, ascending p grid, trials per p, root seed and the
    decision mode (None picks the default for k and the size limits).
    """
    n: int
    k: int
    p_grid: Tuple[float, ...]
    trials: int
    seed: int
    decision: Optional[str] = None

    def __post_init__(self):
        self.p_grid = tuple(float(p) for p in self.p_grid)
        if not self.p_grid:
            raise InvalidInputError("p grid is empty")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise InvalidInputError(f"probabilities must lie in [0, 1]: {list(self.p_grid)}")
        if list(self.p_grid) != sorted(self.p_grid):
            raise InvalidInputError(f"p grid must be ascending: {list(self.p_grid)}")
        if self.trials < 1:
            raise InvalidInputError(f"trials must be at least 1, got {self.trials}")
        if not 1 <= self.k <= self.n - self.k:
            raise InvalidInputError(f"need 1 <= k <= n-k, got k={self.k}, n={self.n}")
        if self.decision is not None and self.decision not in DECISIONS:
            raise InvalidInputError(f"decision must be one of {DECISIONS}, got {self.decision!r}")

    def resolved_decision(self, config: LabConfig) -> str:
        if self.decision is not None:
            return self.decision
        if self.k >= 3 and self.n <= config.max_n:
            return ORACLE
        return PREDICATE


@dataclass
class SweepPoint:
    p: float
    trials: int
    connected: int
    disconnected: int
    unknown: int

    @property
    def estimate(self) -> float:
        return self.connected / self.trials

    @property
    def stderr(self) -> float:
        est = self.estimate
        return math.sqrt(est * (1.0 - est) / self.trials)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'p': self.p,
            'trials': self.trials,
            'connected': self.connected,
            'disconnected': self.disconnected,
            'unknown': self.unknown,
            'estimate': self.estimate,
            'stderr': self.stderr,
        }


@dataclass
class SweepResult:
    config: SweepConfig
    decision: str
    points: List[SweepPoint]
    verdicts: List[List[str]] = field(default_factory=list, repr=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([pt.to_dict() for pt in self.points], columns=FRAME_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.config.n,
            'k': self.config.k,
            'seed': self.config.seed,
            'decision': self.decision,
            'points': [pt.to_dict() for pt in self.points],
        }


def decide(y: Graph, k: int, decision: str, config: Optional[LabConfig] = None) -> str:
    """Connectivity verdict for FS(K_{k,n-k}, y) by predicate or by oracle."""
    config = config or LabConfig()
    if decision == PREDICATE:
        return predict(y, k, config).verdict
    if decision == ORACLE:
        x = complete_bipartite(k, y.order - k)
        return CONNECTED if fs_is_connected(x, y, config, threads=1) else DISCONNECTED
    raise InvalidInputError(f"decision must be one of {DECISIONS}, got {decision!r}")


def sweep(cfg: SweepConfig, config: Optional[LabConfig] = None, threads: Optional[int] = None,
          progress: Optional[ProgressCallback] = None) -> SweepResult:
    """
    Run every trial of a sweep and tally the verdicts per p.

    Args:
        cfg: Sweep parameters
        config: Size limits and default worker count
        threads: Worker count override
        progress: Optional callback(done, total, fraction)

    Returns:
        SweepResult with one point per grid probability
    """
    config = config or LabConfig()
    decision = cfg.resolved_decision(config)
    if decision == ORACLE:
        check_instance_size(cfg.n, config)

    tasks = [(i, t) for i in range(len(cfg.p_grid)) for t in range(cfg.trials)]

    def run_trial(task: Tuple[int, int]) -> str:
        i, t = task
        y = sample_gnp(cfg.n, cfg.p_grid[i], trial_rng(cfg.seed, i, t))
        return decide(y, cfg.k, decision, config)

    processor = BatchProcessor(max_workers=threads or config.threads, batch_size=256)
    logger.info(f"Sweep n={cfg.n} k={cfg.k}: {len(cfg.p_grid)} probabilities x {cfg.trials} trials ({decision})")
    outcomes = processor.map_ordered(tasks, run_trial, progress)

    points: List[SweepPoint] = []
    verdicts: List[List[str]] = []
    for i, p in enumerate(cfg.p_grid):
        row = outcomes[i * cfg.trials:(i + 1) * cfg.trials]
        verdicts.append(row)
        points.append(SweepPoint(p, cfg.trials, row.count(CONNECTED), row.count(DISCONNECTED), row.count(UNKNOWN)))
        logger.debug(f"p={p:.5f}: {points[-1].connected}/{cfg.trials} connected, {points[-1].unknown} unknown")
    return SweepResult(cfg, decision, points, verdicts)


def check_monotone(result: SweepResult, tolerance: float = 3.0) -> List[Dict[str, float]]:
    """
    Adjacent grid points whose estimate drops by more than `tolerance`
    combined standard errors.
    """
    violations: List[Dict[str, float]] = []
    for lo, hi in zip(result.points, result.points[1:]):
        drop = lo.estimate - hi.estimate
        allowed = tolerance * math.sqrt(lo.stderr ** 2 + hi.stderr ** 2)
        if drop > allowed:
            violations.append({'p_low': lo.p, 'p_high': hi.p, 'drop': drop, 'allowed': allowed})
    return violations
