"""Deterministic derivation of named random streams from one master seed.

Every source of randomness in a run (adversary draws, walk increments,
learner sampling, probe perturbations) pulls from its own child stream of
the run's master seed.  Child streams are keyed by fixed integer ids, so a
value drawn for a given (seed, stream, index) is the same no matter what
else has been sampled before it.  That property is what lets counterfactual
replays see exactly the randomness of the original run.
"""

from __future__ import annotations

import numpy as np

_UINT64 = (1 << 64) - 1

# stream ids; never renumber, or archived runs stop being reproducible
BEST_ARM_STREAM = 1
WALK_STREAM = 2
LEARNER_STREAM = 3
LOSS_TABLE_STREAM = 4
PROBE_STREAM = 5
SPLIT_STREAM = 6


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the child stream identified by ``path``.

    Identical (master_seed, path) pairs always yield generators producing
    identical draws, independent of creation order.
    """
    entropy = (int(master_seed) & _UINT64,) + tuple(int(p) & _UINT64 for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def run_seed(seed_base: int, run_index: int) -> int:
    """Stable per-run master seed.

    Depends only on (seed_base, run_index): adding more repetitions to a
    sweep never reshuffles the seeds of runs that already exist.
    """
    ss = np.random.SeedSequence((int(seed_base) & _UINT64, int(run_index) & _UINT64))
    return int(ss.generate_state(1, np.uint64)[0])
