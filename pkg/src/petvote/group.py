"""Arithmetic in the group of quadratic residues modulo a safe prime.

All values live in the order-q subgroup G of Z_p^* where p = 2q + 1 and both
p and q are prime.  Elements are validated for membership when they enter
the system; results of group operations are members by closure and skip the
(one exponentiation) re-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .rng import Rng

# 48 Miller-Rabin rounds: error probability < 4^-48 < 2^-80.
_MR_ROUNDS = 48

_SMALL_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]


class GroupError(ValueError):
    pass


def is_probable_prime(n: int) -> bool:
    return n >= 2 and gmpy2.is_prime(gmpy2.mpz(n), _MR_ROUNDS) != 0


@dataclass(frozen=True)
class GroupParams:
    """Safe-prime group description: p = 2q + 1, g generates the QR subgroup."""

    p: int
    q: int
    g: int

    def __post_init__(self):
        if self.p != 2 * self.q + 1:
            raise GroupError("p != 2q + 1")
        if not is_probable_prime(self.p) or not is_probable_prime(self.q):
            raise GroupError("p and q must both be prime")
        if not 1 < self.g < self.p:
            raise GroupError("generator out of range")
        if self.g == 1 or pow(self.g, self.q, self.p) != 1:
            raise GroupError("g must be a quadratic residue != 1")

    def element(self, value: int) -> "GroupElement":
        return GroupElement(value, self)

    def one(self) -> "GroupElement":
        return GroupElement(1, self, _trusted=True)

    def generator(self) -> "GroupElement":
        return GroupElement(self.g, self, _trusted=True)

    def check_scalar(self, x: int) -> int:
        if not 0 <= x < self.q:
            raise GroupError(f"scalar {x} outside [0, q-1]")
        return x

    def random_element(self, rng: Rng) -> "GroupElement":
        return self.generator().pow(rng.scalar(self.q))

    def to_text(self) -> str:
        return f"{self.p} {self.q} {self.g}"

    @classmethod
    def from_text(cls, text: str) -> "GroupParams":
        p, q, g = (int(part) for part in text.split())
        return cls(p, q, g)


_powmod = gmpy2.powmod
_invert = gmpy2.invert


class GroupElement:
    """Member of G.  Membership (value^q = 1 mod p) is checked on construction."""

    __slots__ = ("value", "params")

    def __init__(self, value: int, params: GroupParams, *, _trusted: bool = False):
        if not _trusted:
            if not 1 <= value <= params.p - 1:
                raise GroupError(f"value {value} outside [1, p-1]")
            if _powmod(value, params.q, params.p) != 1:
                raise GroupError(f"value {value} is not a quadratic residue mod p")
        self.value = value
        self.params = params

    def _same_group(self, other: "GroupElement") -> None:
        if self.params != other.params:
            raise GroupError("elements belong to different group parameters")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._same_group(other)
        return GroupElement(self.value * other.value % self.params.p, self.params, _trusted=True)

    def __truediv__(self, other: "GroupElement") -> "GroupElement":
        return self * other.inv()

    def pow(self, exponent: int) -> "GroupElement":
        return GroupElement(
            int(_powmod(self.value, exponent % self.params.q, self.params.p)),
            self.params,
            _trusted=True,
        )

    def inv(self) -> "GroupElement":
        return GroupElement(int(_invert(self.value, self.params.p)), self.params, _trusted=True)

    def is_one(self) -> bool:
        return self.value == 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupElement)
            and self.value == other.value
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.value, self.params.p))

    def __repr__(self):
        return f"GroupElement({self.value})"


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    return a * b


def pow_element(a: GroupElement, x: int) -> GroupElement:
    return a.pow(x)


def inv(a: GroupElement) -> GroupElement:
    return a.inv()


def is_member(params: GroupParams, x: int) -> bool:
    """True iff x^q mod p = 1, for 1 <= x <= p-1."""
    if not 1 <= x <= params.p - 1:
        raise GroupError(f"membership query {x} outside [1, p-1]")
    return _powmod(x, params.q, params.p) == 1


def generate_params(bits: int, seed) -> GroupParams:
    """Deterministically generate a safe-prime group of the given p bit length.

    The candidate stream is derived from the seed, so equal (bits, seed) always
    produce identical parameters.  Intended for test and desk-scale groups;
    use STANDARD_3072 for the production-sized group.
    """
    if bits < 16:
        raise GroupError("bits must be >= 16")
    rng = Rng(seed).child(f"safe-prime-{bits}")
    budget = 400 * bits * bits
    for _ in range(budget):
        q = rng.getrandbits(bits - 1) | (1 << (bits - 2)) | 1
        if any(q % s == 0 and q != s for s in _SMALL_PRIMES):
            continue
        p = 2 * q + 1
        if any(p % s == 0 and p != s for s in _SMALL_PRIMES):
            continue
        if not is_probable_prime(q) or not is_probable_prime(p):
            continue
        while True:
            h = rng.randrange(2, p - 1)
            g = h * h % p
            if g != 1:
                break
        return GroupParams(p=p, q=q, g=g)
    raise GroupError(f"no safe prime of {bits} bits found within {budget} candidates")


def encode_int(params: GroupParams, x: int) -> GroupElement:
    """Embed an integer 0 <= x <= q-2 into G (shift by one, then take the
    quadratic-residue representative of the pair {v, p-v})."""
    if not 0 <= x <= params.q - 2:
        raise GroupError(f"integer {x} outside encodable range [0, q-2]")
    return canonical_embed(params, x + 1)


def decode_int(params: GroupParams, e: GroupElement) -> int:
    v = e.value if e.value <= params.q else params.p - e.value
    return v - 1


def canonical_embed(params: GroupParams, v: int) -> GroupElement:
    """Map 1 <= v <= p-1 to whichever of {v, p-v} lies in G.

    For a safe prime p = 3 mod 4, -1 is a non-residue, so exactly one of the
    pair is a member.
    """
    if not 1 <= v <= params.p - 1:
        raise GroupError(f"value {v} outside [1, p-1]")
    if _powmod(v, params.q, params.p) == 1:
        return GroupElement(v, params, _trusted=True)
    return GroupElement(params.p - v, params, _trusted=True)


# RFC 3526 3072-bit MODP group: p is a safe prime and 2 generates the
# quadratic-residue subgroup.  This is the "standard" production group; the
# code-capacity figures are computed against it.
_P_3072_HEX = (
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AAAC42DAD33170D04507A33"
    "A85521ABDF1CBA64ECFB850458DBEF0A8AEA71575D060C7DB3970F85A6E1E4C7"
    "ABF5AE8CDB0933D71E8C94E04A25619DCEE3D2261AD2EE6BF12FFA06D98A0864"
    "D87602733EC86A64521F2B18177B200CBBE117577A615D6C770988C0BAD946E2"
    "08E24FA074E5AB3143DB5BFCE0FD108E4B82D120A93AD2CAFFFFFFFFFFFFFFFF"
)


def standard_3072() -> GroupParams:
    p = int(_P_3072_HEX, 16)
    return GroupParams(p=p, q=(p - 1) // 2, g=2)
