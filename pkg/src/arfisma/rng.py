"""Reproducible random number generation.

All stochastic routines in this package draw from a counter-based Philox
generator.  Seeds are combined through ``numpy.random.SeedSequence`` so that
a (master seed, replication index, stage tag) triple always yields the same
stream, independently of how many worker processes or threads are running.
"""

from __future__ import annotations

import numpy as np

# Stage tags used when deriving per-replication streams.  Distinct tags keep
# the simulation innovations, the ECF integration nodes and the MH chain
# statistically independent of each other.
STAGE_SIMULATION = 1
STAGE_ECF_NODES = 2
STAGE_MH_CHAIN = 3
STAGE_RESTARTS = 4


def make_rng(seed) -> np.random.Generator:
    """Return a Philox-backed Generator for ``seed``.

    ``seed`` may be an int, a sequence of ints, a ``SeedSequence``, or an
    existing ``Generator`` (returned unchanged so callers can thread a
    stream through).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(master_seed: int, rep_index: int, stage: int) -> np.random.SeedSequence:
    """Seed for one (replication, stage) cell of an experiment.

    Hashing happens inside SeedSequence; the result does not depend on the
    order replications are executed in.
    """
    return np.random.SeedSequence([int(master_seed), int(rep_index), int(stage)])


def tagged_seed(seed, tag: int) -> np.random.SeedSequence:
    """Derive a sub-seed from ``seed`` (int or SeedSequence) and an int tag."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + (int(tag),)
        )
    return np.random.SeedSequence([int(seed), int(tag)])


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
