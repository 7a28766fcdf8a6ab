"""Background batch assembly.

A worker thread cuts seeded per-epoch permutations of the training rows
into batches and hands them to the trainer through a bounded queue. Batch
``k`` of the run depends only on (seed, k), so a resumed run sees exactly
the batches an uninterrupted one would.
"""
import logging
import math
import queue
import threading
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.training_objectives.losses import Batch

logger = logging.getLogger("LOADER")

_DONE = object()


def steps_per_epoch(n_rows: int, batch_size: int) -> int:
    return math.ceil(n_rows / batch_size)


def batch_at(
    x0: np.ndarray, y: np.ndarray, batch_size: int, seed: int, step: int
) -> Batch:
    """The batch consumed at global ``step`` (0-based)."""
    per_epoch = steps_per_epoch(len(x0), batch_size)
    epoch, offset = divmod(step, per_epoch)
    order = np.random.default_rng([seed, epoch]).permutation(len(x0))
    rows = order[offset * batch_size:(offset + 1) * batch_size]
    return Batch(x0[rows], y[rows])


class BatchLoader:
    def __init__(
        self,
        x0: np.ndarray,
        y: np.ndarray,
        batch_size: int,
        seed: int,
        start_step: int,
        total_steps: int,
        queue_size: int = 4,
    ):
        if len(x0) == 0:
            raise ValueError(f"{__name__} ERROR: no training rows")
        self.x0 = x0
        self.y = y
        self.batch_size = batch_size
        self.seed = seed
        self.start_step = start_step
        self.total_steps = total_steps
        self.queue: "queue.Queue" = queue.Queue(maxsize=queue_size)
        self._stop = threading.Event()
        self.name = "Batch loader thread"
        self._thread = threading.Thread(
            name=self.name, target=self._run, daemon=True
        )

    def _put(self, item) -> bool:
        while not self._stop.is_set():
            try:
                self.queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _run(self) -> None:
        try:
            for step in range(self.start_step, self.total_steps):
                batch = batch_at(
                    self.x0, self.y, self.batch_size, self.seed, step
                )
                if not self._put((step, batch)):
                    return
        except Exception as err:  # surfaced on the trainer thread
            self._put(err)
            return
        self._put(_DONE)

    def start(self) -> "BatchLoader":
        self._thread.start()
        return self

    def __iter__(self) -> Iterator[Tuple[int, Batch]]:
        while True:
            item = self.queue.get()
            if item is _DONE:
                return
            if isinstance(item, Exception):
                raise item
            yield item

    def terminate(self) -> None:
        self._stop.set()

    def is_alive(self) -> bool:
        return self._thread.is_alive()

    def join(self, timeout: Optional[float] = None) -> None:
        self._thread.join(timeout)


def terminate_loader(loader: BatchLoader, logger) -> None:
    """Stop the worker thread and wait for it to exit."""
    logger.debug(f"Terminating {loader.name}...")
    loader.terminate()
    while loader.is_alive():
        loader.join(0.1)
    logger.debug(f"{loader.name} terminated successfully!")


def clean_up(logger, loaders: List[Optional[BatchLoader]]) -> None:
    for loader in loaders:
        if loader is not None:
            terminate_loader(loader, logger)
