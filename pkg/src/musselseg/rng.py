"""Counter-based random streams.

Every stream is keyed by ``(seed, purpose, *counters)`` and backed by a
Philox generator, so the numbers a mussel sees in a given iteration do not
depend on how many draws other mussels made or on evaluation order.
"""

import numpy as np

PURPOSES = {
    "init": 1,
    "update": 2,
    "subsample": 3,
    "kmeans": 4,
    "blobs": 5,
}


def stream(seed: int, purpose: str, *counters: int) -> np.random.Generator:
    key = (PURPOSES[purpose],) + tuple(int(c) for c in counters)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
