"""Non-interactive sigma protocols and the distributed plaintext-equivalence test.

All proofs are Fiat-Shamir transformed with per-proof-type domain labels and an
explicit context (election id, voter id, ...) folded into every challenge, so a
proof cannot be replayed against a different statement or in a different
context.

The PET works as follows: for ciphertexts c, c' under the joint teller key,
the tellers blind the quotient c/c' in a cascade: each raises the previous
teller's output to a fresh secret exponent z_i in [1, q-1] and proves
(relative to a commitment g^{z_i}) that it did so consistently.  The final
pair is threshold-decrypted: it opens to the identity iff the two plaintexts
are equal, and to a nonzero power of the plaintext quotient otherwise, so
nothing beyond the verdict leaks.  The combined exponent is the product of
the z_i, which is never divisible by the prime q, so a false "equal" verdict
is impossible, not merely improbable (a sum of exponents could vanish mod q).
"""

from __future__ import annotations

from dataclasses import dataclass

from .canon import fs_challenge
from .elgamal import (
    Ciphertext,
    DecryptionShare,
    EqDlogProof,
    TellerKeyShare,
    ciphertext_pow,
    combine_shares,
    eqdlog_prove,
    eqdlog_verify,
    feldman_evaluate,
    lagrange_at_zero,
    partial_decrypt,
    quotient,
    verify_decryption_share,
)
from .group import GroupElement
from .rng import Rng


class ProofError(ValueError):
    pass


@dataclass(frozen=True)
class SchnorrProof:
    commitment: GroupElement
    challenge: int
    response: int


_POK_LABEL = "ballot-pok"


def prove_plaintext_knowledge(
    pk: GroupElement, c: Ciphertext, r: int, context: bytes, rng: Rng
) -> SchnorrProof:
    """Prove knowledge of the randomness r of c = (g^r, m*pk^r), which implies
    knowledge of the plaintext m."""
    params = pk.params
    w = rng.scalar(params.q)
    commitment = params.generator().pow(w)
    ch = fs_challenge(params.q, _POK_LABEL, context, pk, c.a, c.b, commitment)
    return SchnorrProof(commitment=commitment, challenge=ch, response=(w + ch * r) % params.q)


def verify_plaintext_knowledge(
    pk: GroupElement, c: Ciphertext, proof: SchnorrProof, context: bytes
) -> bool:
    params = pk.params
    ch = fs_challenge(params.q, _POK_LABEL, context, pk, c.a, c.b, proof.commitment)
    if ch != proof.challenge:
        return False
    return params.generator().pow(proof.response) == proof.commitment * c.a.pow(ch)


# --------------------------------------------------------------------------
# Disjunctive proofs (one real branch, the others simulated)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OrBranch:
    """One branch of a disjunction: several (base, target) relations that share
    this branch's challenge, one response per relation group witness."""

    commitments: tuple[tuple[GroupElement, ...], ...]  # per relation-group, per relation
    challenge: int
    responses: tuple[int, ...]  # per relation-group


@dataclass(frozen=True)
class OrProof:
    """Branch challenges sum (mod q) to the Fiat-Shamir master challenge."""

    branches: tuple[OrBranch, ...]


def _flatten(branch_relations):
    out = []
    for group in branch_relations:
        out.extend(group)
    return out


def or_prove(
    branches_relations: list[list[list[tuple[GroupElement, GroupElement]]]],
    witnesses: list[int],
    real_index: int,
    label: str,
    context: bytes,
    rng: Rng,
) -> OrProof:
    """Prove that in at least one branch every relation group shares its witness.

    branches_relations[b][g] is the list of (base, target) pairs of relation
    group g in branch b; all pairs in a group are linked by one exponent.  The
    witnesses are for the real branch only.
    """
    params = branches_relations[0][0][0][0].params
    q = params.q

    sim_challenges = {}
    sim_responses = {}
    commitments: list[tuple[tuple[GroupElement, ...], ...]] = [None] * len(branches_relations)
    real_nonces = []

    for b, branch in enumerate(branches_relations):
        if b == real_index:
            branch_commits = []
            for group in branch:
                w = rng.scalar(q)
                real_nonces.append(w)
                branch_commits.append(tuple(base.pow(w) for base, _ in group))
            commitments[b] = tuple(branch_commits)
        else:
            ch = rng.scalar(q)
            resp = [rng.scalar(q) for _ in branch]
            sim_challenges[b] = ch
            sim_responses[b] = resp
            branch_commits = []
            for g, group in enumerate(branch):
                branch_commits.append(
                    tuple(base.pow(resp[g]) * target.pow(ch).inv() for base, target in group)
                )
            commitments[b] = tuple(branch_commits)

    master = _or_master_challenge(q, label, context, branches_relations, commitments)
    real_challenge = (master - sum(sim_challenges.values())) % q

    branches = []
    for b, branch in enumerate(branches_relations):
        if b == real_index:
            responses = tuple(
                (w + real_challenge * x) % q for w, x in zip(real_nonces, witnesses)
            )
            branches.append(
                OrBranch(commitments=commitments[b], challenge=real_challenge, responses=responses)
            )
        else:
            branches.append(
                OrBranch(
                    commitments=commitments[b],
                    challenge=sim_challenges[b],
                    responses=tuple(sim_responses[b]),
                )
            )
    return OrProof(branches=tuple(branches))


def _or_master_challenge(q, label, context, branches_relations, commitments):
    statement = []
    for branch in branches_relations:
        for base, target in _flatten(branch):
            statement.extend([base, target])
    commits = []
    for branch_commits in commitments:
        for group in branch_commits:
            commits.extend(group)
    return fs_challenge(q, label, context, statement, commits)


def or_verify(
    branches_relations: list[list[list[tuple[GroupElement, GroupElement]]]],
    proof: OrProof,
    label: str,
    context: bytes,
) -> bool:
    if len(proof.branches) != len(branches_relations):
        return False
    params = branches_relations[0][0][0][0].params
    q = params.q
    commitments = [b.commitments for b in proof.branches]
    master = _or_master_challenge(q, label, context, branches_relations, commitments)
    if sum(b.challenge for b in proof.branches) % q != master:
        return False
    for branch_rel, branch in zip(branches_relations, proof.branches):
        if len(branch.commitments) != len(branch_rel) or len(branch.responses) != len(branch_rel):
            return False
        for group, commits, resp in zip(branch_rel, branch.commitments, branch.responses):
            if len(commits) != len(group):
                return False
            for (base, target), commit in zip(group, commits):
                if base.pow(resp) != commit * target.pow(branch.challenge):
                    return False
    return True


# --------------------------------------------------------------------------
# Plaintext equivalence test
# --------------------------------------------------------------------------

_PET_STEP_LABEL = "pet-blinding"


@dataclass(frozen=True)
class PetStep:
    index: int
    blinded: Ciphertext
    commitment: GroupElement  # g^z
    proof: EqDlogProof


@dataclass(frozen=True)
class PetTranscript:
    steps: tuple[PetStep, ...]
    combined: Ciphertext
    shares: tuple[DecryptionShare, ...]
    plaintext: GroupElement
    verdict: bool


def pet_step(share: TellerKeyShare, c: Ciphertext, c_prime: Ciphertext, rng: Rng, context: bytes = b"") -> PetStep:
    """One teller's blinding step: (c/c')^z with z secret, fresh, and nonzero.

    In the cascade, each teller after the first passes the previous blinded
    pair as c and a trivial encryption of one as c'."""
    params = c.a.params
    z = rng.nonzero_scalar(params.q)
    diff = quotient(c, c_prime)
    blinded = ciphertext_pow(diff, z)
    commitment = params.generator().pow(z)
    proof = eqdlog_prove(
        [(params.generator(), commitment), (diff.a, blinded.a), (diff.b, blinded.b)],
        z,
        _PET_STEP_LABEL,
        context + b"|teller:%d" % share.index,
        rng,
    )
    return PetStep(index=share.index, blinded=blinded, commitment=commitment, proof=proof)


def _verify_pet_step(step: PetStep, c: Ciphertext, c_prime: Ciphertext, context: bytes) -> bool:
    params = c.a.params
    diff = quotient(c, c_prime)
    if step.commitment.is_one():  # z = 0 would erase the plaintext difference
        return False
    return eqdlog_verify(
        [(params.generator(), step.commitment), (diff.a, step.blinded.a), (diff.b, step.blinded.b)],
        step.proof,
        _PET_STEP_LABEL,
        context + b"|teller:%d" % step.index,
    )


def _trivial_one(params) -> Ciphertext:
    return Ciphertext(a=params.one(), b=params.one())


def pet_run(
    shares: list[TellerKeyShare],
    c: Ciphertext,
    c_prime: Ciphertext,
    rng: Rng,
    context: bytes = b"",
) -> PetTranscript:
    """Run the full PET among the given tellers; both ciphertexts must be under
    the tellers' joint key.  Aborts naming the teller if a step proof is bad."""
    params = c.a.params
    t = shares[0].t
    one = _trivial_one(params)
    steps = []
    prev = None
    for s in shares:
        if prev is None:
            step = pet_step(s, c, c_prime, rng.child(f"pet-z-{s.index}"), context)
            if not _verify_pet_step(step, c, c_prime, context):
                raise ProofError(f"PET blinding proof invalid for teller {step.index}")
        else:
            step = pet_step(s, prev.blinded, one, rng.child(f"pet-z-{s.index}"), context)
            if not _verify_pet_step(step, prev.blinded, one, context):
                raise ProofError(f"PET blinding proof invalid for teller {step.index}")
        steps.append(step)
        prev = step
    steps = tuple(steps)
    combined = steps[-1].blinded

    dshares = tuple(
        partial_decrypt(s, combined, rng.child(f"pet-share-{s.index}"), context) for s in shares
    )
    plaintext = combine_shares(list(dshares), combined, t, context)
    return PetTranscript(
        steps=steps,
        combined=combined,
        shares=dshares,
        plaintext=plaintext,
        verdict=plaintext.is_one(),
    )


def verify_pet(
    transcript: PetTranscript,
    c: Ciphertext,
    c_prime: Ciphertext,
    commitment_vector: tuple[GroupElement, ...],
    context: bytes = b"",
) -> bool:
    """Re-check a PET transcript end to end against the published key material."""
    if not transcript.steps:
        return False
    params = c.a.params
    q = params.q
    one = _trivial_one(params)
    prev = None
    for step in transcript.steps:
        if prev is None:
            if not _verify_pet_step(step, c, c_prime, context):
                return False
        else:
            if not _verify_pet_step(step, prev.blinded, one, context):
                return False
        prev = step
    if transcript.combined != transcript.steps[-1].blinded:
        return False
    combined = transcript.combined

    indices = [s.index for s in transcript.shares]
    if len(set(indices)) != len(indices) or len(indices) < len(commitment_vector):
        return False
    for ds in transcript.shares:
        if ds.public_key != feldman_evaluate(commitment_vector, ds.index):
            return False
        if not verify_decryption_share(ds, combined, context):
            return False

    coeffs = lagrange_at_zero(indices, q)
    acc = c.a.params.one()
    for ds in transcript.shares:
        acc = acc * ds.value.pow(coeffs[ds.index])
    if combined.b * acc.inv() != transcript.plaintext:
        return False
    return transcript.verdict == transcript.plaintext.is_one()
