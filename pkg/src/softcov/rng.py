"""Counter-based random streams.

Every random quantity is drawn from its own Philox stream keyed by
``(master_seed, purpose, *indices)``, so a trial's randomness does not depend
on which thread ran it or in what order.
"""
from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    CODEBOOK = 1
    CODEBOOK_SIZE = 2
    OUTPUT = 3
    T_CODEBOOK = 4
    T_OUTPUT = 5
    THINNING = 6
    MONOTONE = 7
    POISSON_TAIL = 8
    MOMENT_SWEEP = 9


def stream(master_seed: int, purpose: int, *indices: int) -> np.random.Generator:
    key = (int(purpose),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map uniforms to category indices; ``cdf[-1]`` is forced to one."""
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1)


def make_cdf(p: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return cdf
