"""
Thread pool for round-internal client training.

Each task trains one client from immutable inputs (broadcast state and the
client's own shard and streams). Results are returned keyed by client id,
so the completion order never reaches the aggregation.
"""
import logging
from concurrent.futures import CancelledError, ThreadPoolExecutor, as_completed
from typing import Callable, Dict, Mapping, Optional, TypeVar

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ClientTrainingPool:
    """
    Runs per-client training tasks, serially or on worker threads.

    Usage:
        with ClientTrainingPool(threads=4) as pool:
            results = pool.run({client_id: task, ...})
    """

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise InvalidArgumentError(f"threads must be positive, got {threads}")
        self.threads = threads
        self._executor: Optional[ThreadPoolExecutor] = None
        self._cancel = False
        if threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix="client")
        logger.debug(f"ClientTrainingPool initialized with {threads} thread(s)")

    def cancel(self):
        """Skip every task that has not started yet."""
        self._cancel = True

    def run(self, tasks: Mapping[int, Callable[[], T]]) -> Dict[int, T]:
        """
        Execute ``tasks`` and return their results in ascending id order.

        Raises:
            CancelledError: If :meth:`cancel` was called before completion
            Exception: The first exception raised by a task
        """
        results: Dict[int, T] = {}
        if self._executor is None:
            for client_id in sorted(tasks):
                if self._cancel:
                    raise CancelledError("client training cancelled")
                results[client_id] = tasks[client_id]()
                logger.debug(f"client {client_id} finished ({len(results)}/{len(tasks)})")
        else:
            futures = {self._executor.submit(self._guarded, tasks[cid]): cid for cid in sorted(tasks)}
            try:
                for future in as_completed(futures):
                    client_id = futures[future]
                    results[client_id] = future.result()
                    logger.debug(f"client {client_id} finished ({len(results)}/{len(tasks)})")
            except BaseException:
                for future in futures:
                    future.cancel()
                raise
        return {cid: results[cid] for cid in sorted(results)}

    def _guarded(self, task: Callable[[], T]) -> T:
        if self._cancel:
            raise CancelledError("client training cancelled")
        return task()

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
        return False
