"""Counter-based random streams for reproducible synchronous rounds.

Every draw is addressed by (seed, round, stream tag, position), so replay,
couplings, and any parallel evaluation order all observe the same numbers.
Activeness and proposals live on separate tags: couplings reuse the
activeness stream while re-deriving proposals.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox

MASK64 = (1 << 64) - 1

STREAM_ACTIVE = 1
STREAM_PROPOSAL = 2
STREAM_GRAPH = 4
STREAM_BATCH = 5


def stream(seed: int, round_index: int, tag: int) -> Generator:
    """Generator positioned at the (seed, round, tag) substream.

    The Philox counter's low word is left free for in-stream draws; rounds
    and tags occupy the high words, so substreams never overlap.
    """
    counter = [0, 0, round_index & MASK64, tag & MASK64]
    return Generator(Philox(key=seed & MASK64, counter=counter))


def uniform_colors(u: np.ndarray, q: int) -> np.ndarray:
    """Map uniforms in [0,1) to colors 1..q by floor inversion.

    One draw per entry, so entry i is a pure function of its uniform.
    The modulo-free bias is below q/2**53.
    """
    c = np.floor(u * q).astype(np.int64) + 1
    np.clip(c, 1, q, out=c)
    return c


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Stable sub-seed for trial fan-out; independent of worker scheduling."""
    z = seed & MASK64
    for ix in indices:
        z = splitmix64(z ^ (ix & MASK64))
    return z
