"""Deterministic random-stream helpers.

All randomness in the package flows through counter-based Philox generators
keyed by a user seed plus an integer path.  Streams for different paths are
independent, so the order in which entities are generated (students, folds,
predictions) can never change the output.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for the (seed, *path) substream."""
    words = [int(seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def mix_seed(seed: int, index: int) -> int:
    """Derive a well-mixed 64-bit child seed from (seed, index)."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, int(index) & _MASK64])
    return int(ss.generate_state(1, np.uint64)[0])
