"""Deterministic random-stream derivation.

Every stochastic stage draws its generator from one master seed through
``rng_for(master_seed, *path)``. The path is a tuple of small integers
naming the stage (see ``STAGE`` below for the pipeline's assignments), so
that results never depend on call order, worker count, or ambient entropy.
"""

from __future__ import annotations

import numpy as np

# Stage ids used by the report pipeline. Sub-streams (e.g. one per
# bootstrap replicate or per restart) extend the path with their index.
STAGE = {
    "bootstrap": 1,
    "posterior": 2,
    "fit": 3,
    "simlab_spells": 4,
    "simlab_survey": 5,
    "stats": 6,
    "community_transactions": 7,
    "community_survey": 8,
}


def seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(p) for p in path)
    )


def rng_for(master_seed: int, *path: int) -> np.random.Generator:
    """PCG64 generator for the stage named by ``path``, reproducible by construction."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, *path)))
