"""
Seeded random streams.

Every stream is a numpy Philox (counter-based) generator keyed by a
SeedSequence built from the experiment seed plus integer spawn keys, so a
(T, trial) cell draws the same numbers on every platform and in any order.
"""

import numpy as np


def stream(seed, *keys):
    """Philox generator for the given seed and sub-stream keys"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed, *keys):
    """64-bit integer seed for a sub-experiment"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def uniform_ball(rng, dimension, radius):
    """Point uniformly distributed in the Euclidean ball of the given radius"""
    direction = rng.standard_normal(dimension)
    norm = np.linalg.norm(direction)
    if norm == 0:
        return np.zeros(dimension)
    return radius * rng.random() ** (1.0 / dimension) * direction / norm


def uniform_sphere(rng, dimension, radius):
    direction = rng.standard_normal(dimension)
    return radius * direction / np.linalg.norm(direction)
