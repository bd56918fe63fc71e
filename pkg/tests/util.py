"""Shared corpus builders for the test suite."""

import numpy as np


def random_corpus(rng, num_sets, min_terms, max_terms, name_prefix="set"):
    """Sets of distinct random terms; term universes overlap across sets so
    multiplicities above 1 occur naturally."""
    universe = max(64, (max_terms * num_sets) // 2)
    corpus = {}
    for i in range(num_sets):
        n = int(rng.integers(min_terms, max_terms + 1))
        picks = rng.choice(universe, size=n, replace=False)
        corpus[f"{name_prefix}{i:04d}"] = [f"term{v:08d}" for v in picks]
    return corpus


def byte_terms(rng, count, length=30):
    return [rng.integers(0, 256, size=length, dtype=np.uint8).tobytes() for _ in range(count)]
