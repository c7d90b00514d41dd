"""Named random streams derived from a single integer seed.

Every consumer of randomness draws from its own stream, so adding a consumer or
reordering calls never perturbs another one.
"""
import numpy as np

STREAMS = {"init": 0, "restarts": 1, "split": 2, "synth": 3, "classes": 4}


def stream(seed, name, *index):
    """Generator for the named stream, optionally sub-indexed (e.g. by restart)."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(STREAMS[name], *map(int, index)))
    return np.random.default_rng(seq)


def fit_rng(seed, n_restarts):
    return [stream(seed, "restarts", r) for r in range(n_restarts)]


def derive_seed(seed, name, *index):
    """A 32-bit integer seed for a nested consumer that itself takes an int seed."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(STREAMS[name], *map(int, index)))
    return int(seq.generate_state(1)[0])
