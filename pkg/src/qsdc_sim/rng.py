"""Seeded random streams.

Every sampling operation takes a ``numpy.random.Generator`` explicitly; nothing
in the package touches global random state.  Independent streams are derived
from a root seed plus a spawn key, so trial ``k`` of a run always sees the same
numbers no matter how trials are scheduled across workers.
"""

from __future__ import annotations

import secrets

import numpy as np

DEFAULT_SEED = 20050321
U64_MAX = 2**64 - 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a generator for ``seed`` and the (possibly empty) stream path."""
    if not 0 <= seed <= U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def entropy_seed() -> int:
    return secrets.randbits(64)
