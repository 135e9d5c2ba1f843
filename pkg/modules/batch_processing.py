"""
Ordered batch processing over a worker pool.
Results always come back in input order, so callers that aggregate them
produce identical output for any worker count.
"""

import time
import threading
import concurrent.futures
import logging
from typing import Any, Callable, Dict, List, NamedTuple, Optional, TypeVar

# Configure logging
logger = logging.getLogger(__name__)

T = TypeVar('T')
U = TypeVar('U')

# progress(done, total, fraction)
ProgressCallback = Callable[[int, int, float], None]


class Outcome(NamedTuple):
    item: Any
    result: Any
    error: Optional[Exception]


def _attempt(process_func: Callable[[T], U], item: T) -> Outcome:
    try:
        return Outcome(item, process_func(item), None)
    except Exception as e:
        logger.error(f"Task failed on {item!r:.80}: {str(e)}")
        return Outcome(item, None, e)


class BatchProcessor:
    """
    Runs a function over a list of tasks in rounds of `batch_size`,
    using a thread pool when more than one worker is requested.

    Every call reports one Outcome per task, in task order, and updates
    the running metrics.
    """

    def __init__(self,
                max_workers: int = 1,
                batch_size: int = 64,
                timeout: Optional[float] = None):
        """
        Args:
            max_workers: Worker threads (1 runs inline on the caller's thread)
            batch_size: Tasks per round; progress is reported after each round
            timeout: Seconds to wait for one round (None waits forever)
        """
        self.max_workers = max(1, int(max_workers))
        self.batch_size = max(1, int(batch_size))
        self.timeout = timeout
        self._metrics_lock = threading.RLock()
        self._metrics = self._empty_metrics()

    @staticmethod
    def _empty_metrics() -> Dict[str, Any]:
        return {
            'calls': 0,
            'rounds': 0,
            'total_items': 0,
            'successful_items': 0,
            'failed_items': 0,
            'total_time': 0.0,
        }

    def _rounds(self, items: List[T]):
        for start in range(0, len(items), self.batch_size):
            yield items[start:start + self.batch_size]

    def process_batch(self,
                     items: List[T],
                     process_func: Callable[[T], U],
                     progress_callback: Optional[ProgressCallback] = None) -> List[Outcome]:
        """
        Run `process_func` on every item without raising.

        Args:
            items: Tasks to run
            process_func: Work function, called once per task
            progress_callback: Optional progress(done, total, fraction)

        Returns:
            List[Outcome]: (item, result, error) per task, in input order
        """
        items = list(items)
        started = time.perf_counter()
        outcomes: List[Outcome] = []
        rounds = 0

        executor = None
        if self.max_workers > 1 and len(items) > 1:
            executor = concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers)
        try:
            for chunk in self._rounds(items):
                rounds += 1
                if executor is None:
                    outcomes.extend(_attempt(process_func, item) for item in chunk)
                else:
                    futures = [executor.submit(_attempt, process_func, item) for item in chunk]
                    concurrent.futures.wait(futures, timeout=self.timeout)
                    outcomes.extend(f.result(timeout=0) for f in futures)
                if progress_callback:
                    progress_callback(len(outcomes), len(items), len(outcomes) / len(items))
        finally:
            if executor is not None:
                executor.shutdown(wait=True)

        elapsed = time.perf_counter() - started
        failed = sum(1 for o in outcomes if o.error is not None)
        with self._metrics_lock:
            self._metrics['calls'] += 1
            self._metrics['rounds'] += rounds
            self._metrics['total_items'] += len(items)
            self._metrics['successful_items'] += len(items) - failed
            self._metrics['failed_items'] += failed
            self._metrics['total_time'] += elapsed

        logger.debug(f"{len(items)} tasks in {rounds} rounds on {self.max_workers} workers: "
                     f"{failed} failed, {elapsed:.3f}s")
        return outcomes

    def map_ordered(self,
                    items: List[T],
                    process_func: Callable[[T], U],
                    progress_callback: Optional[ProgressCallback] = None) -> List[U]:
        """
        Like process_batch but returns bare results and re-raises the first
        captured error (in input order).
        """
        outcomes = self.process_batch(items, process_func, progress_callback)
        for outcome in outcomes:
            if outcome.error is not None:
                raise outcome.error
        return [outcome.result for outcome in outcomes]

    def get_metrics(self) -> Dict[str, Any]:
        with self._metrics_lock:
            metrics = dict(self._metrics)
        metrics['items_per_second'] = metrics['total_items'] / metrics['total_time'] if metrics['total_time'] else 0.0
        metrics['max_workers'] = self.max_workers
        return metrics

    def reset_metrics(self) -> None:
        with self._metrics_lock:
            self._metrics = self._empty_metrics()
