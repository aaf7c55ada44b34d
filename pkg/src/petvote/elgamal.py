"""ElGamal encryption: plain, threshold t-of-n, and a CCA2-secure layer.

The election runs four key domains over the same group: the election key and
the code key are threshold keys held by the tellers, the auxiliary key is a
CCA2 (Cramer-Shoup) key whose secret every teller holds, and the printing
facility holds an ordinary key pair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canon import digest, fs_challenge
from .group import GroupElement, GroupParams, GroupError, canonical_embed
from .rng import Rng


class ThresholdError(ValueError):
    pass


class IntegrityError(ValueError):
    """CCA2 ciphertext failed its integrity check."""


@dataclass(frozen=True)
class Ciphertext:
    """ElGamal pair (g^r, m * pk^r)."""

    a: GroupElement
    b: GroupElement

    def serialize(self) -> list[int]:
        return [self.a.value, self.b.value]


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: GroupElement


def keygen(params: GroupParams, rng: Rng) -> KeyPair:
    sk = rng.scalar(params.q)
    return KeyPair(sk=sk, pk=params.generator().pow(sk))


def encrypt(pk: GroupElement, m: GroupElement, r: int) -> Ciphertext:
    """Encrypt m under pk with explicit randomness r.

    Fixing r = 1 gives the deterministic encryptions used during code table
    generation, where every observer must be able to recompute the ciphertext.
    """
    params = pk.params
    if m.params != params:
        raise GroupError("message not in the key's group")
    if not 0 <= r < params.q:
        raise GroupError("randomness outside [0, q-1]")
    return Ciphertext(a=params.generator().pow(r), b=m * pk.pow(r))


def decrypt(sk: int, c: Ciphertext) -> GroupElement:
    return c.b * c.a.pow(sk).inv()


def homomorphic_mul(c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return Ciphertext(a=c1.a * c2.a, b=c1.b * c2.b)


def reencrypt(pk: GroupElement, c: Ciphertext, r: int) -> Ciphertext:
    """Re-randomize: same plaintext, randomness adds."""
    params = pk.params
    if not 0 <= r < params.q:
        raise GroupError("randomness outside [0, q-1]")
    return Ciphertext(a=c.a * params.generator().pow(r), b=c.b * pk.pow(r))


def quotient(c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Componentwise c1 / c2; encrypts the plaintext quotient."""
    return Ciphertext(a=c1.a / c2.a, b=c1.b / c2.b)


def ciphertext_pow(c: Ciphertext, z: int) -> Ciphertext:
    return Ciphertext(a=c.a.pow(z), b=c.b.pow(z))


# --------------------------------------------------------------------------
# Threshold key material (joint Feldman VSS) and decryption shares
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TellerKeyShare:
    """One teller's share of a jointly generated threshold key.

    pow(g, share) must equal the Feldman evaluation of commitment_vector at
    this teller's index.
    """

    index: int
    share: int
    commitment_vector: tuple[GroupElement, ...]
    public_key: GroupElement
    n: int
    t: int

    def verification_key(self) -> GroupElement:
        return feldman_evaluate(self.commitment_vector, self.index)


def feldman_evaluate(commitments: tuple[GroupElement, ...], index: int) -> GroupElement:
    """g^{f(index)} from the commitments to f's coefficients."""
    acc = commitments[0].params.one()
    e = 1
    for c in commitments:
        acc = acc * c.pow(e)
        e = e * index % c.params.q
    return acc


def dkg(params: GroupParams, n: int, t: int, rng: Rng) -> tuple[GroupElement, list[TellerKeyShare]]:
    """Joint-Feldman distributed key generation.

    Every teller deals a Feldman VSS of a fresh random secret; the joint secret
    is the sum of the dealt secrets and is never materialized.  Any t shares
    reconstruct it by Lagrange interpolation; fewer reveal nothing.
    """
    if not 1 <= t <= n:
        raise ThresholdError(f"invalid threshold {t} of {n}")
    q, g = params.q, params.generator()

    poly_coeffs = []
    commitments = []
    for i in range(n):
        dealer_rng = rng.child(f"dkg-dealer-{i}")
        coeffs = [dealer_rng.scalar(q) for _ in range(t)]
        poly_coeffs.append(coeffs)
        commitments.append([g.pow(c) for c in coeffs])

    combined = []
    for j in range(t):
        acc = params.one()
        for i in range(n):
            acc = acc * commitments[i][j]
        combined.append(acc)
    combined = tuple(combined)
    pk = combined[0]

    shares = []
    for idx in range(1, n + 1):
        total = 0
        for coeffs in poly_coeffs:
            acc = 0
            e = 1
            for c in coeffs:
                acc = (acc + c * e) % q
                e = e * idx % q
            total = (total + acc) % q
        shares.append(
            TellerKeyShare(
                index=idx, share=total, commitment_vector=combined, public_key=pk, n=n, t=t
            )
        )

    for s in shares:
        if g.pow(s.share) != feldman_evaluate(combined, s.index):
            raise ThresholdError(f"Feldman check failed for share {s.index}")
    return pk, shares


def lagrange_at_zero(indices: list[int], q: int) -> dict[int, int]:
    """Lagrange coefficients lambda_i with sum_i lambda_i * f(i) = f(0) mod q."""
    if len(set(indices)) != len(indices):
        raise ThresholdError("duplicate share indices")
    coeffs = {}
    for i in indices:
        num, den = 1, 1
        for j in indices:
            if j == i:
                continue
            num = num * j % q
            den = den * (j - i) % q
        coeffs[i] = num * pow(den, -1, q) % q
    return coeffs


def reconstruct_secret(shares: list[TellerKeyShare], q: int) -> int:
    coeffs = lagrange_at_zero([s.index for s in shares], q)
    return sum(coeffs[s.index] * s.share for s in shares) % q


@dataclass(frozen=True)
class EqDlogProof:
    """Chaum-Pedersen proof that one exponent links every (base, target) pair."""

    commitments: tuple[GroupElement, ...]
    challenge: int
    response: int


def eqdlog_prove(
    relations: list[tuple[GroupElement, GroupElement]], witness: int, label: str, context: bytes, rng: Rng
) -> EqDlogProof:
    params = relations[0][0].params
    w = rng.scalar(params.q)
    commitments = tuple(base.pow(w) for base, _ in relations)
    c = fs_challenge(
        params.q,
        label,
        context,
        [base for base, _ in relations],
        [target for _, target in relations],
        list(commitments),
    )
    return EqDlogProof(commitments=commitments, challenge=c, response=(w + c * witness) % params.q)


def eqdlog_verify(
    relations: list[tuple[GroupElement, GroupElement]], proof: EqDlogProof, label: str, context: bytes
) -> bool:
    params = relations[0][0].params
    if len(proof.commitments) != len(relations):
        return False
    c = fs_challenge(
        params.q,
        label,
        context,
        [base for base, _ in relations],
        [target for _, target in relations],
        list(proof.commitments),
    )
    if c != proof.challenge:
        return False
    for (base, target), commit in zip(relations, proof.commitments):
        if base.pow(proof.response) != commit * target.pow(c):
            return False
    return True


@dataclass(frozen=True)
class DecryptionShare:
    """a^share_i plus a proof of consistency with the teller's verification key."""

    index: int
    value: GroupElement
    public_key: GroupElement  # g^share_i, checkable against the Feldman commitments
    proof: EqDlogProof


_SHARE_LABEL = "decryption-share"


def partial_decrypt(share: TellerKeyShare, c: Ciphertext, rng: Rng, context: bytes = b"") -> DecryptionShare:
    params = c.a.params
    vk = share.verification_key()
    value = c.a.pow(share.share)
    proof = eqdlog_prove(
        [(params.generator(), vk), (c.a, value)], share.share, _SHARE_LABEL, context, rng
    )
    return DecryptionShare(index=share.index, value=value, public_key=vk, proof=proof)


def verify_decryption_share(ds: DecryptionShare, c: Ciphertext, context: bytes = b"") -> bool:
    params = c.a.params
    return eqdlog_verify(
        [(params.generator(), ds.public_key), (c.a, ds.value)], ds.proof, _SHARE_LABEL, context
    )


def combine_shares(shares: list[DecryptionShare], c: Ciphertext, t: int, context: bytes = b"") -> GroupElement:
    """Recover the plaintext from >= t valid decryption shares.

    Raises naming the culprit index if any share's proof fails.
    """
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ThresholdError("duplicate share indices")
    if len(shares) < t:
        raise ThresholdError(f"need {t} shares, got {len(shares)}")
    for s in shares:
        if not verify_decryption_share(s, c, context):
            raise ThresholdError(f"invalid decryption share from teller {s.index}")
    q = c.a.params.q
    coeffs = lagrange_at_zero(indices, q)
    acc = c.a.params.one()
    for s in shares:
        acc = acc * s.value.pow(coeffs[s.index])
    return c.b * acc.inv()


# --------------------------------------------------------------------------
# CCA2 layer (Cramer-Shoup over the same group)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Cca2PublicKey:
    g1: GroupElement
    g2: GroupElement
    c: GroupElement
    d: GroupElement
    h: GroupElement


@dataclass(frozen=True)
class Cca2KeyPair:
    x1: int
    x2: int
    y1: int
    y2: int
    z: int
    pk: Cca2PublicKey


@dataclass(frozen=True)
class Cca2Ciphertext:
    u1: GroupElement
    u2: GroupElement
    e: GroupElement
    v: GroupElement


def _second_generator(params: GroupParams) -> GroupElement:
    counter = 0
    while True:
        seedval = int.from_bytes(digest("aux-generator", params.p, params.g, counter), "big")
        g2 = pow(seedval % params.p, 2, params.p)
        if g2 not in (0, 1) and g2 != params.g:
            return GroupElement(g2, params, _trusted=True)
        counter += 1


def cca2_keygen(params: GroupParams, rng: Rng) -> Cca2KeyPair:
    g1 = params.generator()
    g2 = _second_generator(params)
    x1, x2, y1, y2, z = (rng.scalar(params.q) for _ in range(5))
    pk = Cca2PublicKey(
        g1=g1,
        g2=g2,
        c=g1.pow(x1) * g2.pow(x2),
        d=g1.pow(y1) * g2.pow(y2),
        h=g1.pow(z),
    )
    return Cca2KeyPair(x1=x1, x2=x2, y1=y1, y2=y2, z=z, pk=pk)


def cca2_encrypt(pk: Cca2PublicKey, m: GroupElement, rng: Rng) -> Cca2Ciphertext:
    q = m.params.q
    r = rng.scalar(q)
    u1, u2 = pk.g1.pow(r), pk.g2.pow(r)
    e = pk.h.pow(r) * m
    alpha = fs_challenge(q, "cca2-tag", u1, u2, e)
    v = pk.c.pow(r) * pk.d.pow(r * alpha % q)
    return Cca2Ciphertext(u1=u1, u2=u2, e=e, v=v)


def cca2_decrypt(key: Cca2KeyPair, ct: Cca2Ciphertext) -> GroupElement:
    q = ct.u1.params.q
    alpha = fs_challenge(q, "cca2-tag", ct.u1, ct.u2, ct.e)
    check = ct.u1.pow((key.x1 + key.y1 * alpha) % q) * ct.u2.pow((key.x2 + key.y2 * alpha) % q)
    if check != ct.v:
        raise IntegrityError("ciphertext integrity check failed")
    return ct.e * ct.u1.pow(key.z).inv()


def encode_bits(params: GroupParams, bits: list[int]) -> GroupElement:
    """Pack a bit vector into a single group element (for the flipped-bit vector)."""
    value = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError("bits must be 0/1")
        value |= b << i
    return canonical_embed(params, value + 1)


def decode_bits(params: GroupParams, e: GroupElement, k: int) -> list[int]:
    v = e.value if e.value <= params.q else params.p - e.value
    value = v - 1
    if value < 0 or value >> k:
        raise ValueError("decoded bit vector out of range")
    return [(value >> i) & 1 for i in range(k)]
