"""Reproducible random number streams.

All samplers in this package draw from Philox, a counter-based 64-bit
generator.  A stream is addressed by an integer seed plus an optional tuple
of stream indices (the ``spawn_key`` of the underlying ``SeedSequence``), so
parallel workers can derive disjoint, order-independent substreams from one
user-facing seed:

    generator(seed)            # the root stream
    generator(seed, rep)       # substream for replicate ``rep``
    generator(seed, rep, 1)    # nested substream

Two calls with the same (seed, *stream) always yield identical output, no
matter how many other streams were consumed in between.
"""

from __future__ import annotations

import numpy as np

__all__ = ["generator"]


def generator(seed: int, *stream: int) -> np.random.Generator:
    """Return a Philox generator for the given seed and substream address."""
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
