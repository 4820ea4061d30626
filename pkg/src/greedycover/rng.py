"""Reproducible random streams.

Every stochastic routine in the package draws from a Philox counter-based
generator keyed by (user_seed, domain, index).  The key layout is

    key = [seed mod 2**64, (domain << 48) | index]

so a single user seed never aliases streams across purposes (graph sampling
vs. process runs vs. subset draws), and work unit `index` (a trial, run, or
copy number) gets its own stream that can be regenerated in isolation.  This
is what makes results independent of execution order and thread count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MAX_INDEX = 1 << 48

# Domain codes.  Never reuse or renumber: streams are part of the output
# contract (same seed must keep producing the same bytes across versions).
GRAPH = 0
RUN = 1
SUBSET = 2
PAIRS = 3
UNIFORM_SET = 4
COVER_FLAT = 5
COVER_PART = 6
MEMBERSHIP = 7
CHAIN = 8
PREFIX = 9
BIPARTITE = 10
P3_SAMPLE = 11


def stream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Return the Generator for work unit `index` of `domain` under `seed`."""
    if not 0 <= index < _MAX_INDEX:
        raise ValueError(f"stream index out of range: {index}")
    if not 0 <= domain < (1 << 16):
        raise ValueError(f"domain out of range: {domain}")
    key = [seed & _MASK64, (domain << 48) | index]
    return np.random.Generator(np.random.Philox(key=key))


def int_stream(seed: int, domain: int, index: int = 0):
    """stdlib Random for exact arbitrary-precision integer draws.

    Seeded from the first words of the matching Philox stream so the two
    families stay coupled to the same (seed, domain, index) identity.
    """
    import random

    words = stream(seed, domain, index).integers(0, _MASK64, 4, dtype=np.uint64)
    material = int.from_bytes(words.tobytes(), "little")
    return random.Random(material)
