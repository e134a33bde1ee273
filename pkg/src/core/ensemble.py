"""
Reproducible sample-parallel execution.

Every sample is a pure function of ``(master_seed, index)``, so the order in
which workers finish does not matter; results always come back sorted by
sample index.
"""
import logging
from typing import Callable, Iterable, List, Sequence, TypeVar

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

T = TypeVar("T")


class EnsembleRunner:
    """Maps a per-sample function over sample indices with joblib."""

    def __init__(self, n_jobs: int = 1, backend: str = "loky"):
        """
        Initialize the runner.

        Args:
            n_jobs: Number of workers (1 runs in-process)
            backend: joblib backend used when n_jobs > 1
        """
        if n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")
        self.n_jobs = n_jobs
        self.backend = backend

    def map(self, func: Callable[[int], T], indices: Iterable[int]) -> List[T]:
        """
        Evaluate ``func`` on every index.

        Args:
            func: Picklable callable taking a sample index
            indices: Sample indices

        Returns:
            Results ordered like ``indices``
        """
        indices = list(indices)
        if self.n_jobs == 1 or len(indices) <= 1:
            return [func(i) for i in indices]

        logger.debug("Dispatching %d samples to %d %s workers", len(indices), self.n_jobs, self.backend)
        return Parallel(n_jobs=self.n_jobs, backend=self.backend)(
            delayed(func)(i) for i in indices
        )

    def map_chunks(self, func: Callable[[Sequence[int]], List[T]], indices: Iterable[int],
                   chunk_size: int) -> List[T]:
        """
        Evaluate a batch function on consecutive chunks and flatten the results.

        Args:
            func: Callable taking a sequence of indices and returning one result per index
            indices: Sample indices
            chunk_size: Indices per chunk

        Returns:
            Flat list of results ordered like ``indices``
        """
        indices = list(indices)
        chunks = [indices[i:i + chunk_size] for i in range(0, len(indices), chunk_size)]
        if self.n_jobs == 1 or len(chunks) <= 1:
            parts = [func(chunk) for chunk in chunks]
        else:
            parts = Parallel(n_jobs=self.n_jobs, backend=self.backend)(
                delayed(func)(chunk) for chunk in chunks
            )
        return [item for part in parts for item in part]
