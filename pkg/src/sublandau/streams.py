"""Deterministic child-stream derivation from a single master seed.

Every stochastic routine in this package draws from a stream derived from
(master seed, purpose label, trial index). Estimates assembled from
per-trial streams in fixed chunk order are therefore bit-identical no
matter how many workers run the trials or in what order chunks finish.
"""

from __future__ import annotations

import hashlib
from typing import Iterator

import numpy as np

__all__ = ["label_key", "child_seed", "child_rng", "chunk_ranges"]


def label_key(label: str) -> int:
    """Map a purpose label to a stable 64-bit spawn key component."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def child_seed(master: int, label: str, index: int) -> np.random.SeedSequence:
    # spawn_key keeps streams for different (label, index) pairs independent
    # without consuming state from a shared parent sequence
    return np.random.SeedSequence(entropy=master, spawn_key=(label_key(label), index))


def child_rng(master: int, label: str, index: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, label, index))


def chunk_ranges(total: int, chunk: int) -> Iterator[tuple[int, int]]:
    """Yield (start, stop) pairs covering range(total) in fixed-size chunks.

    Chunk boundaries depend only on (total, chunk), never on worker count,
    so partial reductions combine identically for any parallelism.
    """
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        yield start, stop
        start = stop
