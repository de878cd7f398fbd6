"""Reproducible random substreams keyed by (seed, stream id, block)."""

import numpy as np


def substream(seed, *keys):
    """Generator for ``(seed, *keys)``; independent of how many other streams exist."""
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
    else:
        entropy = seed
    ss = np.random.SeedSequence(entropy, spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def fresh_seed():
    return int(np.random.SeedSequence().entropy % (2**63))
