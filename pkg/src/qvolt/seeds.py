"""Seed derivation for reproducible sub-streams.

One master seed per run; every consumer (bit generation per source, blinding
permutation, acquisition noise, Monte Carlo resampling) gets an independent
stream derived by hashing (master, label...). Adding or reordering consumers
never perturbs the streams of the others.
"""

import hashlib

import numpy as np


def derive_seed(master: int, *labels) -> int:
    """Deterministic 64-bit sub-seed from a master seed and a label path."""
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "little")


def derive_rng(master: int, *labels) -> np.random.Generator:
    """Independent generator for the sub-stream named by `labels`."""
    return np.random.default_rng(derive_seed(master, *labels))


def cycle_rng(noise_seed: int, cycle_index: int) -> np.random.Generator:
    """Per-cycle noise stream, split by blinded cycle index.

    Cycles are independent given these streams, so evaluation order (or
    parallel evaluation over cycles) cannot change the result.
    """
    return np.random.default_rng(np.random.SeedSequence((noise_seed, cycle_index)))
