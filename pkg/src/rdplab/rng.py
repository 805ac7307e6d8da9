"""Counter-based random streams (Philox) with explicit stream splitting.

Every simulation derives its generators as `stream(seed, k)`; distinct stream
indices are statistically independent, so per-trial streams can be consumed
in any order (or in parallel) without changing results.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# reserved stream indices; trial t uses TRIAL_BASE + t
CODEBOOK_STREAM = 0
AUX_STREAM = 1
TRIAL_BASE = 2


def stream(seed: int, stream_id: int) -> np.random.Generator:
    """Philox generator for (seed, stream_id); identical inputs, identical output."""
    return np.random.Generator(
        np.random.Philox(key=[int(seed) & _MASK64, int(stream_id) & _MASK64])
    )


def randint_below(gen: np.random.Generator, bound: int) -> int:
    """Exact uniform integer in [0, bound) for arbitrary-precision bounds."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    bits = bound.bit_length()
    nbytes = (bits + 7) // 8
    mask = (1 << bits) - 1
    while True:
        r = int.from_bytes(gen.bytes(nbytes), "little") & mask
        if r < bound:
            return r
