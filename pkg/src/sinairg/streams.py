"""Seed splitting.

Every stream is a PCG64 generator seeded from ``SeedSequence(seed,
spawn_key=key)``.  Replica ``i`` of an experiment uses ``key=(tag, i)``
where ``tag`` separates experiment families, so streams for different
replicas or families never overlap and a replica's stream does not depend
on how work is chunked.
"""

from __future__ import annotations

import numpy as np

# experiment family tags
PATH = 1
SYNTHETIC = 2
RENEWAL = 3
RENEWAL_BLOCK = 4
SAMPLER = 5
DERIVED = 6


def rng_for(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Integer seed for a sub-experiment, independent of ``seed`` itself."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(DERIVED,) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
