"""Deterministic per-task seed derivation."""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def task_seed(seed: int, index: int) -> int:
    """Seed for task ``index`` of a run seeded with ``seed``."""
    return splitmix64((seed & MASK64) ^ splitmix64(index))


def task_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(task_seed(seed, index))
