"""Reproducible random streams keyed by ``(seed, stream_id)``."""

from __future__ import annotations

import numpy as np


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Independent generator for replication chunk ``stream_id`` of a run."""
    if seed is None:
        raise ValueError("seed is mandatory")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream_id)]))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    """Split ``total`` replications into fixed-size chunks (last one shorter)."""
    if total < 0 or chunk <= 0:
        raise ValueError("need total >= 0 and chunk > 0")
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes
