import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from ..config import get_settings

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        workers = get_settings().max_workers
    if workers < 1:
        raise ValueError(f"workers={workers} must be at least 1")
    return workers


class WorkerPool:
    """Pool de threads reutilizável; map() preserva a ordem dos itens."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = resolve_workers(workers)
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "WorkerPool":
        if self.workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.workers)
        return self

    def __exit__(self, *exc) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        work = list(items)
        if self._executor is None or len(work) < 2:
            return [func(item) for item in work]
        return list(self._executor.map(func, work))
