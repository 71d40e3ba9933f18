"""Deterministic seed derivation.

Every stochastic routine in the library takes its randomness from a
generator addressed by ``(root_seed, *path)`` where the path is a fixed
tuple of small non-negative integers naming the consumer (chain index,
sweep index, column index, ...).  Derivation is order-independent, so
parallel workers and serial runs produce identical streams.
"""

from __future__ import annotations

import numpy as np

_U64 = (1 << 64) - 1


def canonical_seed(seed: int) -> int:
    """Map an arbitrary Python int (possibly negative) onto [0, 2^64)."""
    return int(seed) & _U64


def spawn_rng(seed: int, *path: int) -> np.random.Generator:
    """Child generator for ``seed`` addressed by an integer path."""
    entropy = [canonical_seed(seed)] + [int(p) & _U64 for p in path]
    return np.random.default_rng(entropy)
