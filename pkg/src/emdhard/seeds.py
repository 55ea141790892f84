"""Per-stage seed derivation (SplitMix64)."""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, stage: int) -> int:
    """Independent 64-bit seed for ``stage`` of a run seeded with ``seed``."""
    return splitmix64((int(seed) & MASK64) ^ splitmix64(int(stage) & MASK64))


def stage_rng(seed: int, stage: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, stage))
