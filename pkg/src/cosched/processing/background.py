"""
Background evaluation of independent jobs (corner LPs of one oracle call,
Monte Carlo trials) on a thread pool, with results returned in submission
order so every reduction downstream is deterministic.
"""
from __future__ import annotations

import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "COSCHED_WORKERS"


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        value = int(raw) if raw else default
    except ValueError:
        logger.warning("%s=%r is not an integer, using %d worker(s)", WORKERS_ENV, raw, default)
        return default
    return max(1, value)


class BackgroundEvaluator:
    def __init__(self, workers: Optional[int] = None):
        self.workers = workers_from_env() if workers is None else max(1, workers)
        self._executor: Optional[ThreadPoolExecutor] = None
        self._lock = threading.Lock()

    def start(self) -> None:
        """Create the pool; a single worker evaluates inline."""
        with self._lock:
            if self.workers > 1 and self._executor is None:
                self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="cosched")
                logger.debug("background evaluator started with %d workers", self.workers)

    def stop(self) -> None:
        with self._lock:
            if self._executor is not None:
                self._executor.shutdown(wait=True)
                self._executor = None

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply ``fn`` to every item; results keep the order of ``items``."""
        items = list(items)
        if self.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        self.start()
        return list(self._executor.map(fn, items))

    def __enter__(self) -> "BackgroundEvaluator":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def argmax_first(values: List[float]) -> int:
    """Index of the largest value, ties to the lowest index."""
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


background_evaluator = BackgroundEvaluator()
