import numpy as np

# stream keys under one master seed
NETWORK_STREAM = 0
AGENT_STREAM = 1
EPISODE_STREAM = 2


def derive_seed(master: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master), *(int(k) for k in keys)])


def make_rng(master: int, *keys: int) -> np.random.Generator:
    if not keys:
        return np.random.default_rng(int(master))
    return np.random.default_rng(derive_seed(master, *keys))
