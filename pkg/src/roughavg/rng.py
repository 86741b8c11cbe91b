"""Counter-based random streams.

Every stochastic object is drawn from a Philox generator keyed by
``(master_seed, sample_index, stream)``.  Distinct samples and distinct
roles (slow driver, fast driver, frozen-equation noise, ...) therefore get
independent streams whose output does not depend on execution order, which
is what makes parallel Monte Carlo runs bit-reproducible.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream_generator", "Streams"]

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


class Streams:
    """Stream ids; keep stable, they are part of the reproducibility contract."""

    SLOW_DRIVER = 1
    FAST_DRIVER = 2
    FROZEN_NOISE = 3
    PAIR_SUBSAMPLE = 4
    PROBE = 5
    DIAG = 6


def stream_generator(master_seed: int, sample_index: int = 0, stream: int = 0) -> np.random.Generator:
    """Philox generator for one (seed, sample, stream) triple."""
    if sample_index < 0 or stream < 0:
        raise ValueError("sample_index and stream must be nonnegative")
    key = np.empty(2, dtype=np.uint64)
    key[0] = np.uint64(master_seed) & _MASK64
    key[1] = (np.uint64(sample_index) << np.uint64(16)) | (np.uint64(stream) & np.uint64(0xFFFF))
    return np.random.Generator(np.random.Philox(key=key))
