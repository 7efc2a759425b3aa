"""Seed handling: explicit, hierarchical, scheduler-independent.

Every stochastic routine takes a `seed` that may be an int, a SeedSequence,
or an already-built Generator.  Parallel experiments derive one stream per
(replica, purpose) pair from the master seed alone, so results do not depend
on thread scheduling.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def as_generator(seed) -> np.random.Generator:
    """Normalize an int / SeedSequence / Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if isinstance(seed, (int, np.integer)):
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    raise TypeError(f"seed must be int, SeedSequence or Generator, got {type(seed).__name__}")


def derive_seed(master_seed: int, *path: int) -> np.random.SeedSequence:
    """Child seed at a fixed address below the master seed.

    The address path (e.g. (replica, stream)) fully determines the stream, so
    any worker can derive it independently of execution order.
    """
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    return as_generator(derive_seed(master_seed, *path))


# stream tags used by the harness so tree and percolation randomness can be
# varied independently
TREE_STREAM = 0
PERC_STREAM = 1
DRAW_STREAM = 2
