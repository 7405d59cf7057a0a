"""Shared generators for randomized tests (seeded, no global state)."""

import numpy as np


def random_distribution(rng: np.random.Generator, pool=None, max_support: int = 6) -> dict:
    """A random sparse distribution over a small token pool."""
    if pool is None:
        pool = [f"tok{i}" for i in range(12)]
    support = rng.choice(len(pool), size=int(rng.integers(1, max_support + 1)), replace=False)
    weights = rng.random(len(support)) + 0.05
    weights /= weights.sum()
    return {pool[i]: float(w) for i, w in zip(support, weights)}
