"""Seed derivation for reproducible sampling.

All randomness in the toolkit flows through Philox counter-based generators
so that a (seed, stream) pair identifies one bit stream regardless of
platform or call order elsewhere in the process. Batch jobs derive one
generator per sample via ``rng_for(base_seed, sample_index)``, which makes
parallel and serial runs produce identical corpora.
"""
from __future__ import annotations

import numpy as np


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Return a Philox generator keyed by ``seed`` and optional stream ids."""
    entropy = (int(seed),) + tuple(int(s) for s in stream)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
