"""Counter-based random streams keyed by (seed, index, ...).

A stream depends only on its key, so replicate ``i`` draws the same numbers
regardless of scheduling or worker count.
"""
import numpy as np


def stream(seed, *keys):
    """Philox generator for the key ``(seed, *keys)``."""
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
