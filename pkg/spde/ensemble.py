"""
Chunked ensemble generation.

Trajectory i always uses NoiseStream(seed, i). Chunks have a fixed size
that does not depend on the thread count, run on a thread pool and are
yielded in index order, so every reduction over them is bit-reproducible.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.conf import settings

from .solver import check_epsilon, simulate_batch
from .stream import batch_increments

logger = logging.getLogger(__name__)


def _batched(iterable, n):
    # itertools.batched fallback for Python < 3.12
    iterator = iter(iterable)
    while batch := tuple(itertools.islice(iterator, n)):
        yield batch


batched = getattr(itertools, 'batched', _batched)


@dataclass(frozen=True, eq=False)
class EnsembleChunk:
    start: int
    states: np.ndarray
    log_weights: Optional[np.ndarray]
    blow_up: np.ndarray

    @property
    def size(self):
        return self.states.shape[0]

    @property
    def finite(self):
        return self.blow_up < 0


def chunk_ranges(count, chunk_size):
    return [range(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]


def iter_ensemble(u0, epsilon, dynamics, seed, count, control=None, chunk_size=None, threads=None):
    """Yield EnsembleChunk objects covering trajectories 0 .. count-1 in order"""
    check_epsilon(epsilon)
    if control is not None and epsilon <= 0:
        raise ValueError("a shifted ensemble needs epsilon > 0")
    chunk_size = chunk_size or settings.FWLAB_CHUNK_SIZE
    threads = max(1, threads or settings.FWLAB_THREADS)

    def run(indices):
        increments = batch_increments(seed, indices, dynamics.steps, dynamics.K, dynamics.dt)
        states, log_weights, blow_up = simulate_batch(u0, epsilon, dynamics, increments, control)
        return EnsembleChunk(indices.start, states, log_weights, blow_up)

    ranges = chunk_ranges(count, chunk_size)
    logger.debug("ensemble of %d trajectories in %d chunks on %d threads", count, len(ranges), threads)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        for wave in batched(ranges, threads):
            yield from executor.map(run, wave)
