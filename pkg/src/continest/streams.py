"""Named substreams of a master seed.

Every randomized stage derives its generator as a pure function of
(master_seed, stage kind, indices), never from shared mutable state.
Two consequences the rest of the package leans on: results are bitwise
identical for any worker count or execution order, and two runs that
differ only in the time window or the source set consume exactly the
same randomness, which turns statistical monotonicity into exact
per-sample monotonicity.
"""

from __future__ import annotations

import numpy as np

KIND_TAU = 0
KIND_LABEL = 1
KIND_NAIVE = 2


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (kind, index...) slot under a master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def tau_stream(master_seed: int, sample_index: int) -> np.random.Generator:
    return substream(master_seed, KIND_TAU, sample_index)


def label_stream(master_seed: int, sample_index: int, label_set_index: int) -> np.random.Generator:
    return substream(master_seed, KIND_LABEL, sample_index, label_set_index)


def naive_stream(master_seed: int, sample_index: int) -> np.random.Generator:
    return substream(master_seed, KIND_NAIVE, sample_index)
