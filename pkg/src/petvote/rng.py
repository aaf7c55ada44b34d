"""Deterministic randomness streams.

Every operation in this package that needs randomness takes an explicit
stream object, so a whole protocol run is replayable from a single seed.
Streams are hierarchical: ``child(label)`` derives an independent stream,
which lets each simulated party own its own randomness without the parties
having to consume from a shared sequence in a fragile order.

This is a simulator.  The streams are built on the Mersenne Twister and are
not suitable for production key material.
"""

from __future__ import annotations

import hashlib
import random


def _seed_bytes(seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, str):
        return seed.encode("utf-8")
    if isinstance(seed, int):
        return str(seed).encode("ascii")
    raise TypeError(f"unsupported seed type: {type(seed).__name__}")


class Rng:
    """A replayable random stream seeded from an int, str, or bytes."""

    def __init__(self, seed):
        self._seed = _seed_bytes(seed)
        digest = hashlib.sha256(b"petvote-rng|" + self._seed).digest()
        self._r = random.Random(int.from_bytes(digest, "big"))

    def child(self, label: str) -> "Rng":
        """Derive an independent stream; same (seed, label) -> same stream."""
        return Rng(self._seed + b"/" + label.encode("utf-8"))

    def randrange(self, a: int, b: int | None = None) -> int:
        return self._r.randrange(a, b)

    def getrandbits(self, n: int) -> int:
        return self._r.getrandbits(n)

    def randbytes(self, n: int) -> bytes:
        return self._r.randbytes(n)

    def scalar(self, q: int) -> int:
        """Uniform exponent in [0, q-1]."""
        return self._r.randrange(q)

    def nonzero_scalar(self, q: int) -> int:
        """Uniform exponent in [1, q-1]."""
        return self._r.randrange(1, q)

    def bit(self) -> int:
        return self._r.randrange(2)

    def bits(self, n: int) -> list[int]:
        return [self._r.randrange(2) for _ in range(n)]

    def choice(self, seq):
        return self._r.choice(seq)

    def shuffle(self, seq: list) -> None:
        self._r.shuffle(seq)

    def permutation(self, n: int) -> list[int]:
        perm = list(range(n))
        self._r.shuffle(perm)
        return perm

    def hex_token(self, nbytes: int = 16) -> str:
        return self.randbytes(nbytes).hex()
