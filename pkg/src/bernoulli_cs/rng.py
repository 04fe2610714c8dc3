"""Counter-based random streams.

Every random draw in the package goes through an :class:`RngStream`, a
``(seed, stream)`` pair keying a Philox generator.  Draws depend only on the
key and the draw counter, so trials keyed by distinct stream ids can run in
any order, on any number of threads, and still reproduce exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_id(*parts) -> int:
    """Stable 64-bit id for an arbitrary tuple of labels (str/int/float)."""
    text = "\x1f".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = ((int(self.seed) & _MASK64) << 64) | (int(self.stream) & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *parts) -> "RngStream":
        """Derive a new stream under the same seed, labelled by ``parts``."""
        return RngStream(self.seed, stream_id(self.stream, *parts))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator, an int seed or None."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(0 if rng is None else int(rng)).generator()
