"""Deterministic splittable random streams.

All randomness in the package flows through counter-based Philox generators
addressed by (master seed, integer key path). Substreams derived from the
same seed and key path are identical regardless of creation order, which
makes trajectories and Monte Carlo trials reproducible bit-for-bit and safe
to generate in parallel.
"""

from __future__ import annotations

import numpy as np

__all__ = ["as_seed_sequence", "substream", "generator"]


def as_seed_sequence(seed: int | np.random.SeedSequence) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def substream(seed: int | np.random.SeedSequence, *key: int) -> np.random.SeedSequence:
    """Child seed sequence addressed by an integer key path."""
    base = as_seed_sequence(seed)
    if not key:
        return base
    return np.random.SeedSequence(
        entropy=base.entropy, spawn_key=tuple(base.spawn_key) + tuple(int(k) for k in key)
    )


def generator(seed: int | np.random.SeedSequence, *key: int) -> np.random.Generator:
    """Philox generator on the substream addressed by ``key``."""
    return np.random.Generator(np.random.Philox(substream(seed, *key)))
