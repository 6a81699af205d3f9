"""Deterministic seed derivation for independent RNG streams."""

from __future__ import annotations

import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """Return a u64 seed for the stream identified by ``(master, *keys)``."""
    sequence = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *keys))
