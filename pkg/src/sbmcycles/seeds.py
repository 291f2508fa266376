"""Per-trial random streams derived from a master seed by trial index."""
import os

import numpy as np

SEED_ENV = "SBMCYCLES_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def trial_seed_sequence(master_seed: int, index: int, group: int | None = None) -> np.random.SeedSequence:
    key = (int(index),) if group is None else (int(group), int(index))
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)


def trial_seed(master_seed: int, index: int, group: int | None = None) -> int:
    """64-bit seed recorded alongside a trial; depends only on its key."""
    state = trial_seed_sequence(master_seed, index, group).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def trial_rng(master_seed: int, index: int, group: int | None = None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed_sequence(master_seed, index, group)))
