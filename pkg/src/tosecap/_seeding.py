"""Seed-sequence contract.

Every random stream is derived from a master integer seed plus a key path, so
trial ``i`` of a Monte-Carlo loop always sees the same generator no matter how
many trials run or in which order they are evaluated.
"""

import numpy as np


def derive_rng(seed, *key):
    """Return a generator for ``(seed, *key)``.

    ``seed`` may also be an existing :class:`numpy.random.Generator`, which is
    passed through untouched (``key`` must then be empty).
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise TypeError("cannot derive a keyed stream from a Generator")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.default_rng(ss)


def trial_rngs(seed, trials):
    """Independent generators, one per trial index."""
    return [derive_rng(seed, i) for i in range(trials)]
