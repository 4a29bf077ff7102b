"""Seeded random streams.

Every random quantity in the package is drawn from a PCG64 generator whose
state comes from ``numpy.random.SeedSequence(master_seed, spawn_key=key)``.
The key is a tuple of small non-negative integers naming the stream, so a
stream depends only on ``(master_seed, key)`` and never on the order in which
other streams were consumed. This is the split function used for graph
matchings, Bernoulli blocks, protocol initializations and per-run seeds.
"""

import numpy as np

RNG_NAME = "PCG64/SeedSequence-v1"

# stream namespaces (first element of the spawn key)
INTERNAL_MATCHING = 1
CROSS_MATCHING = 2
BERNOULLI_INTRA = 3
BERNOULLI_CROSS = 4
RADEMACHER = 10
SIGNATURE_RUN = 11
EIGEN_START = 12
NORM_START = 13
PROJECTION_TRIALS = 14
CLI_PROTOCOL = 20

_MASK64 = (1 << 64) - 1


def _check_seed(seed):
    seed = int(seed)
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream(seed, *key):
    """Return the generator for stream ``key`` under ``seed``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *key):
    """Derive an unsigned 64-bit child seed for stream ``key``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
