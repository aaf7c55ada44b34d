"""Prime-product encodings of voting options and return codes.

Voting options are encoded as the first small primes that are quadratic
residues, so a subset of selected options becomes the product of their primes
and can be recovered by trial division.  Return codes are encoded per option
over disjoint prime tables so that the product of k encoded codes decomposes
uniquely back into the k codes.

Two code-table layouts are supported:

* sparse: one residue prime per code bit; a code's encoding is the product of
  the primes at its set bit positions.
* dense: 32 consecutive primes represent 5 code bits, exactly one prime set
  per chunk.  Chunk primes are not filtered for residuosity; the chunk product
  is embedded into the group by taking whichever of {v, p-v} is a residue, and
  decoding tries both candidates.  This packs noticeably more code bits into
  one ciphertext than the sparse layout.

Capacity accounting is worst case: an encoding is admissible only if the
largest possible product of table primes stays below p, never a bit-count
heuristic.  ``capacity`` and the ``*_capacity_bits`` figures rate the nominal
layout whose code tables start at the very first usable prime; a CodeEncoding
built next to an OptionEncoding re-checks its actual (offset) tables on
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import islice
from typing import Iterator

import gmpy2

from .group import GroupElement, GroupParams, canonical_embed

_DENSE_CHUNK_PRIMES = 32
_DENSE_CHUNK_BITS = 5


class EncodingError(ValueError):
    pass


class MalformedPlaintextError(EncodingError):
    """A decrypted value does not decompose over the expected prime table."""


class CapacityError(EncodingError):
    pass


def all_primes() -> Iterator[int]:
    c = gmpy2.mpz(1)
    while True:
        c = gmpy2.next_prime(c)
        yield int(c)


def qr_primes(params: GroupParams) -> Iterator[int]:
    """Ascending primes that are members of G (Jacobi symbol 1 against p)."""
    for pr in all_primes():
        if pr >= params.p:
            return
        if gmpy2.jacobi(pr, params.p) == 1:
            yield pr


@dataclass(frozen=True)
class OptionEncoding:
    """The first k residue primes, one per voting option."""

    params: GroupParams
    k: int
    primes: tuple[int, ...]

    @classmethod
    def build(cls, params: GroupParams, k: int) -> "OptionEncoding":
        if k < 1:
            raise EncodingError("need at least one option")
        primes = tuple(islice(qr_primes(params), k))
        if len(primes) < k:
            raise CapacityError(f"group has fewer than {k} residue primes")
        prod = 1
        for pr in primes:
            prod *= pr
        if prod >= params.p:
            raise CapacityError("product of all option primes reaches p")
        return cls(params=params, k=k, primes=primes)

    def gamma(self, option: int) -> GroupElement:
        if not 1 <= option <= self.k:
            raise EncodingError(f"option {option} outside [1, {self.k}]")
        return GroupElement(self.primes[option - 1], self.params, _trusted=True)

    def encode_choice(self, choices: list[int]) -> GroupElement:
        if len(choices) != self.k:
            raise EncodingError(f"expected {self.k} choice bits")
        prod = 1
        for bit, pr in zip(choices, self.primes):
            if bit not in (0, 1):
                raise EncodingError("choices must be 0/1")
            if bit:
                prod = prod * pr % self.params.p
        return GroupElement(prod, self.params, _trusted=True)

    def decode_choice(self, v: GroupElement) -> list[int]:
        residual = v.value
        bits = []
        for pr in self.primes:
            if residual % pr == 0:
                bits.append(1)
                residual //= pr
            else:
                bits.append(0)
        if residual != 1:
            raise MalformedPlaintextError(f"residual factor {residual} after option primes")
        return bits


def _sparse_tables(prime_iter: Iterator[int], k: int, l: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(islice(prime_iter, l)) for _ in range(k))


def _dense_tables(prime_iter: Iterator[int], k: int, chunks: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    return tuple(
        tuple(tuple(islice(prime_iter, _DENSE_CHUNK_PRIMES)) for _ in range(chunks))
        for _ in range(k)
    )


@dataclass(frozen=True)
class CodeEncoding:
    """Per-option encodings of the code space Codes = {1, ..., m} into G.

    Code c maps to the bit pattern of c-1; the all-zero pattern is legal and
    encodes (in sparse mode) to the group identity.
    """

    params: GroupParams
    k: int
    l: int
    m: int
    mode: str
    sparse_tables: tuple[tuple[int, ...], ...] | None
    dense_tables: tuple[tuple[tuple[int, ...], ...], ...] | None

    @classmethod
    def build(
        cls,
        params: GroupParams,
        k: int,
        l: int,
        m: int,
        mode: str = "sparse",
        option_encoding: OptionEncoding | None = None,
    ) -> "CodeEncoding":
        if mode not in ("sparse", "dense"):
            raise EncodingError(f"unknown mode {mode!r}")
        if not (k >= 1 and l >= 1 and m >= 1):
            raise EncodingError("k, l, m must be positive")
        if m > 2**l:
            raise EncodingError(f"code space {m} exceeds 2^{l}")
        reserved = set(option_encoding.primes) if option_encoding else set()

        if mode == "sparse":
            stream = (pr for pr in qr_primes(params) if pr not in reserved)
            tables = _sparse_tables(stream, k, l)
            if sum(len(t) for t in tables) < k * l:
                raise CapacityError("not enough residue primes for the sparse tables")
            worst = 1
            for table in tables:
                for pr in table:
                    worst *= pr
            if worst >= params.p:
                raise CapacityError("worst-case sparse code product reaches p")
            return cls(params, k, l, m, mode, tables, None)

        padded = -(-l // _DENSE_CHUNK_BITS) * _DENSE_CHUNK_BITS  # round up to 5-bit chunks
        chunks = padded // _DENSE_CHUNK_BITS
        stream = (pr for pr in all_primes() if pr not in reserved)
        tables = _dense_tables(stream, k, chunks)
        worst = 1
        for table in tables:
            for chunk in table:
                worst *= chunk[-1]
        if worst >= params.p:
            raise CapacityError("worst-case dense code product reaches p")
        return cls(params, k, padded, m, mode, None, tables)

    def all_primes_flat(self) -> list[int]:
        if self.mode == "sparse":
            return [pr for table in self.sparse_tables for pr in table]
        return [pr for table in self.dense_tables for chunk in table for pr in chunk]

    def delta(self, i: int, c: int) -> GroupElement:
        """Group encoding of code c for option i."""
        if not 1 <= i <= self.k:
            raise EncodingError(f"option index {i} outside [1, {self.k}]")
        if not 1 <= c <= self.m:
            raise EncodingError(f"code {c} outside [1, {self.m}]")
        pattern = c - 1
        if self.mode == "sparse":
            prod = 1
            for j, pr in enumerate(self.sparse_tables[i - 1]):
                if (pattern >> j) & 1:
                    prod = prod * pr % self.params.p
            return GroupElement(prod, self.params, _trusted=True)
        prod = 1
        for chunk in self.dense_tables[i - 1]:
            prod = prod * chunk[pattern % _DENSE_CHUNK_PRIMES] % self.params.p
            pattern >>= _DENSE_CHUNK_BITS
        return canonical_embed(self.params, prod)

    def decode_codes(self, product: GroupElement) -> list[int]:
        """Invert the product delta_1(c_1) * ... * delta_k(c_k)."""
        if self.mode == "sparse":
            return self._decode_sparse(product.value)
        candidates = [product.value, self.params.p - product.value]
        results = []
        for cand in candidates:
            try:
                results.append(self._decode_dense(cand))
            except MalformedPlaintextError:
                pass
        if not results:
            raise MalformedPlaintextError("neither embedding candidate factors over the tables")
        if len(results) > 1 and results[0] != results[1]:
            raise MalformedPlaintextError("ambiguous dense decoding")
        return results[0]

    def decode_single(self, i: int, value: GroupElement) -> int:
        """Decode one option's delta value (test and audit helper)."""
        for c in range(1, self.m + 1):
            if self.delta(i, c) == value:
                return c
        raise MalformedPlaintextError(f"value is not a code encoding for option {i}")

    def _decode_sparse(self, value: int) -> list[int]:
        residual = value
        codes = []
        for table in self.sparse_tables:
            pattern = 0
            for j, pr in enumerate(table):
                if residual % pr == 0:
                    pattern |= 1 << j
                    residual //= pr
            codes.append(pattern + 1)
        if residual != 1:
            raise MalformedPlaintextError(f"residual factor {residual} after code primes")
        for c in codes:
            if c > self.m:
                raise MalformedPlaintextError(f"decoded code {c} outside the code space")
        return codes

    def _decode_dense(self, value: int) -> list[int]:
        residual = value
        codes = []
        for table in self.dense_tables:
            pattern = 0
            for chunk_no, chunk in enumerate(table):
                hits = [idx for idx, pr in enumerate(chunk) if residual % pr == 0]
                if len(hits) != 1:
                    raise MalformedPlaintextError(
                        f"dense chunk {chunk_no} has {len(hits)} primes set (want 1)"
                    )
                pattern |= hits[0] << (_DENSE_CHUNK_BITS * chunk_no)
                residual //= chunk[hits[0]]
            codes.append(pattern + 1)
        if residual != 1:
            raise MalformedPlaintextError(f"residual factor {residual} after code primes")
        for c in codes:
            if c > self.m:
                raise MalformedPlaintextError(f"decoded code {c} outside the code space")
        return codes


def capacity(params: GroupParams, k: int, l: int, mode: str = "sparse") -> bool:
    """True iff k options of l-bit codes fit one ciphertext in the nominal
    layout (code tables starting at the first usable prime)."""
    if mode == "sparse":
        worst = 1
        taken = 0
        for pr in islice(qr_primes(params), k * l):
            worst *= pr
            taken += 1
            if worst >= params.p:
                return False
        return taken == k * l
    if mode == "dense":
        chunks = k * (-(-l // _DENSE_CHUNK_BITS))
        worst = 1
        stream = all_primes()
        for _ in range(chunks):
            chunk = list(islice(stream, _DENSE_CHUNK_PRIMES))
            worst *= chunk[-1]
            if worst >= params.p:
                return False
        return True
    raise EncodingError(f"unknown mode {mode!r}")


def sparse_capacity_bits(params: GroupParams) -> int:
    """Largest number of independent sparse code bits one ciphertext holds."""
    worst = 1
    bits = 0
    for pr in qr_primes(params):
        if worst * pr >= params.p:
            break
        worst *= pr
        bits += 1
    return bits


def dense_capacity_bits(params: GroupParams) -> int:
    """Largest number of dense code bits (5 per 32-prime chunk) per ciphertext."""
    worst = 1
    chunks = 0
    stream = all_primes()
    while True:
        chunk = list(islice(stream, _DENSE_CHUNK_PRIMES))
        if worst * chunk[-1] >= params.p:
            break
        worst *= chunk[-1]
        chunks += 1
    return chunks * _DENSE_CHUNK_BITS
