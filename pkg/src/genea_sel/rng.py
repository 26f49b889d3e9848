"""Per-replicate random streams and a deterministic replicate map.

Every replicate draws from a stream keyed by ``(master_seed, index)``, so a
replicate's output does not depend on how many workers ran or in which order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def replicate_seed(master_seed: int, index: int, stream: int = 0) -> int:
    """32-bit seed for replicate ``index`` (usable by numba's generator)."""
    ss = np.random.SeedSequence([int(master_seed), int(stream), int(index)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def replicate_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(stream), int(index)]))


def default_workers() -> int:
    return os.cpu_count() or 1


def _run_chunk(args):
    fn, indices = args
    return [fn(i) for i in indices]


def map_replicates(fn: Callable[[int], T], count: int, workers: int | None = None) -> list[T]:
    """Evaluate ``fn(i)`` for ``i in range(count)`` and return results in index order.

    ``fn`` must be picklable when ``workers > 1``. The merge is keyed by index,
    so results are identical for any worker count.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or count < 2:
        return [fn(i) for i in range(count)]
    chunks: list[Sequence[int]] = [
        range(start, count, workers) for start in range(min(workers, count))
    ]
    out: list[T | None] = [None] * count
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk, results in zip(chunks, pool.map(_run_chunk, [(fn, c) for c in chunks])):
            for i, r in zip(chunk, results):
                out[i] = r
    return out  # type: ignore[return-value]
