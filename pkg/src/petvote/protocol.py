"""Ballot casting, code return, finalization, and the stand-in tally.

The voting server drives each voter's session through

    submitted -> codes-sent -> finalized
                     \\-> cancelled

One ballot's server-side processing costs one CCA2 decryption (the flipped-bit
vector), one PET (the submitted choice against the table product), and one
threshold decryption (the code product) no matter how many options the ballot
carries; the counters make that measurable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import wire
from .board import Board
from .codegen import BallotSheet, CodeTableRow, fin_commitment
from .elgamal import (
    Cca2Ciphertext,
    Cca2KeyPair,
    Ciphertext,
    IntegrityError,
    KeyPair,
    TellerKeyShare,
    cca2_decrypt,
    cca2_encrypt,
    cca2_keygen,
    combine_shares,
    decode_bits,
    dkg,
    encode_bits,
    encrypt,
    homomorphic_mul,
    keygen,
    partial_decrypt,
)
from .encoding import CodeEncoding, MalformedPlaintextError, OptionEncoding
from .group import GroupElement, GroupParams, decode_int
from .proofs import PetTranscript, SchnorrProof, pet_run, prove_plaintext_knowledge, verify_plaintext_knowledge
from .rng import Rng

SUBMITTED = "submitted"
CODES_SENT = "codes-sent"
FINALIZED = "finalized"
CANCELLED = "cancelled"


class ProtocolError(ValueError):
    pass


class AuthenticationError(ProtocolError):
    pass


@dataclass
class Counters:
    """Primitive-invocation counts for the server-cost claim."""

    pet_runs: int = 0
    cca2_decryptions: int = 0
    threshold_decryptions: int = 0
    confirm_decryptions: int = 0
    tally_decryptions: int = 0

    def snapshot(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Ballot:
    voter_id: str
    w: Ciphertext
    btilde_ct: Cca2Ciphertext
    pok: SchnorrProof


@dataclass
class CastSession:
    voter_id: str
    state: str
    pet: PetTranscript | None = None
    code_shares: tuple | None = None
    sent_codes: list[int] | None = None
    alarm: str | None = None


@dataclass
class VoterView:
    """What the voter herself holds: the sheet and her intended choices."""

    sheet: BallotSheet
    choices: list[int]
    received_codes: list[int] | None = None
    received_confirmation: str | None = None

    def accepts_codes(self) -> bool:
        return voter_check_codes(self, self.received_codes)


@dataclass
class ElectionContext:
    election_id: str
    params: GroupParams
    options: OptionEncoding
    codes: CodeEncoding
    n_tellers: int
    threshold: int
    e_public: GroupElement  # joint election key
    e_shares: list[TellerKeyShare]
    c_public: GroupElement  # joint code key
    c_shares: list[TellerKeyShare]
    aux_key: Cca2KeyPair  # secret known to every teller
    print_keys: KeyPair
    counters: Counters = field(default_factory=Counters)

    def pok_context(self, voter_id: str) -> bytes:
        return f"{self.election_id}|ballot|{voter_id}".encode()

    def pet_context(self, voter_id: str) -> bytes:
        return f"{self.election_id}|pet|{voter_id}".encode()

    def codes_context(self, voter_id: str) -> bytes:
        return f"{self.election_id}|codes|{voter_id}".encode()

    def tally_context(self, voter_id: str) -> bytes:
        return f"{self.election_id}|tally|{voter_id}".encode()


def setup_election(
    params: GroupParams,
    k: int,
    l: int,
    m: int,
    mode: str,
    n_tellers: int,
    threshold: int,
    rng: Rng,
    election_id: str = "election",
) -> ElectionContext:
    """Generate the four key domains and the encodings; rejects configurations
    whose code tables cannot fit a single ciphertext."""
    options = OptionEncoding.build(params, k)
    codes = CodeEncoding.build(params, k, l, m, mode, option_encoding=options)
    e_public, e_shares = dkg(params, n_tellers, threshold, rng.child("dkg-election"))
    c_public, c_shares = dkg(params, n_tellers, threshold, rng.child("dkg-codes"))
    aux_key = cca2_keygen(params, rng.child("aux-key"))
    print_keys = keygen(params, rng.child("printing-key"))
    return ElectionContext(
        election_id=election_id,
        params=params,
        options=options,
        codes=codes,
        n_tellers=n_tellers,
        threshold=threshold,
        e_public=e_public,
        e_shares=e_shares,
        c_public=c_public,
        c_shares=c_shares,
        aux_key=aux_key,
        print_keys=print_keys,
    )


def build_ballot(
    ctx: ElectionContext, voter_id: str, w_choices: list[int], btilde_bits: list[int], rng: Rng
) -> Ballot:
    """Low-level ballot assembly; lets a corrupted platform pick w and the
    flipped-bit vector independently."""
    params = ctx.params
    r = rng.scalar(params.q)
    w = encrypt(ctx.e_public, ctx.options.encode_choice(w_choices), r)
    pok = prove_plaintext_knowledge(ctx.e_public, w, r, ctx.pok_context(voter_id), rng.child("pok"))
    btilde_ct = cca2_encrypt(ctx.aux_key.pk, encode_bits(params, btilde_bits), rng.child("btilde"))
    return Ballot(voter_id=voter_id, w=w, btilde_ct=btilde_ct, pok=pok)


def platform_build_ballot(
    ctx: ElectionContext, voter_id: str, choices: list[int], flip_bits: list[int], rng: Rng
) -> Ballot:
    """Honest platform: encrypt the product of chosen option encodings and send
    btilde = flip_bits xor choices."""
    if len(choices) != ctx.options.k or len(flip_bits) != ctx.options.k:
        raise ProtocolError("choices and flip bits must have one entry per option")
    btilde = [b ^ v for b, v in zip(flip_bits, choices)]
    return build_ballot(ctx, voter_id, choices, btilde, rng)


class VotingServer:
    """Authenticates voters, processes ballots, and owns the ballot box."""

    def __init__(
        self,
        ctx: ElectionContext,
        board: Board,
        rows: list[CodeTableRow],
        auth_codes: dict[str, str],
    ):
        self.ctx = ctx
        self.board = board
        self.rows = {row.voter_id: row for row in rows}
        self.auth_codes = auth_codes
        self.sessions: dict[str, CastSession] = {}
        self.ballot_box: list[tuple[str, Ciphertext]] = []

    def process_ballot(self, ballot: Ballot, auth_code: str, rng: Rng) -> CastSession:
        """Check the proof, decrypt the flipped bits, select and aggregate the
        table cells, PET the aggregate against the ballot, and on success
        threshold-decrypt and decompose the code product."""
        ctx = self.ctx
        voter_id = ballot.voter_id
        if self.auth_codes.get(voter_id) != auth_code:
            raise AuthenticationError(f"bad authentication code for {voter_id}")
        if voter_id in self.sessions:
            raise ProtocolError(f"re-voting rejected for {voter_id}")
        row = self.rows.get(voter_id)
        if row is None:
            raise ProtocolError(f"no code table row for {voter_id}")
        if not verify_plaintext_knowledge(ctx.e_public, ballot.w, ballot.pok, ctx.pok_context(voter_id)):
            raise ProtocolError(f"invalid proof of plaintext knowledge for {voter_id}")

        # any teller can open the flipped-bit vector; teller 1 is designated
        # and the transcript records that
        self.board.append(
            "ballot",
            {
                "voter_id": voter_id,
                "w": wire.ct_to_wire(ballot.w),
                "btilde": wire.cca2_to_wire(ballot.btilde_ct),
                "pok": wire.schnorr_to_wire(ballot.pok),
                "btilde_decryptor": 1,
            },
        )

        session = CastSession(voter_id=voter_id, state=SUBMITTED)
        self.sessions[voter_id] = session

        ctx.counters.cca2_decryptions += 1
        try:
            btilde = decode_bits(ctx.params, cca2_decrypt(ctx.aux_key, ballot.btilde_ct), ctx.options.k)
        except (IntegrityError, ValueError):
            session.state = CANCELLED
            session.alarm = "btilde-rejected"
            return session

        e_star, c_star = None, None
        for j, bit in enumerate(btilde):
            choice_ct, code_ct = row.cells[j][bit]
            e_star = choice_ct if e_star is None else homomorphic_mul(e_star, choice_ct)
            c_star = code_ct if c_star is None else homomorphic_mul(c_star, code_ct)

        ctx.counters.pet_runs += 1
        pet = pet_run(ctx.e_shares, e_star, ballot.w, rng.child("pet"), ctx.pet_context(voter_id))
        session.pet = pet
        self.board.append(
            "pet",
            {
                "voter_id": voter_id,
                "e_star": wire.ct_to_wire(e_star),
                "c_star": wire.ct_to_wire(c_star),
                "transcript": wire.pet_to_wire(pet),
            },
        )
        if not pet.verdict:
            session.state = CANCELLED
            session.alarm = "pet-failed"
            return session

        ctx.counters.threshold_decryptions += 1
        code_shares = [
            partial_decrypt(s, c_star, rng.child(f"code-share-{s.index}"), ctx.codes_context(voter_id))
            for s in ctx.c_shares
        ]
        product = combine_shares(code_shares, c_star, ctx.threshold, ctx.codes_context(voter_id))
        session.code_shares = tuple(code_shares)
        self.board.append(
            "shares",
            {
                "voter_id": voter_id,
                "c_star": wire.ct_to_wire(c_star),
                "shares": [wire.dshare_to_wire(s) for s in code_shares],
            },
        )
        try:
            codes = self.ctx.codes.decode_codes(product)
        except MalformedPlaintextError:
            session.state = CANCELLED
            session.alarm = "malformed-code-product"
            return session

        session.sent_codes = codes
        session.state = CODES_SENT
        return session

    def finalize(self, voter_id: str, finalization_code: str, rng: Rng) -> str:
        """Against a valid commitment opening: ballot into the box, decrypt and
        return the confirmation code."""
        ctx = self.ctx
        session = self.sessions.get(voter_id)
        if session is None:
            raise ProtocolError(f"no session for {voter_id}")
        if session.state == FINALIZED:
            raise ProtocolError(f"session for {voter_id} already finalized")
        if session.state != CODES_SENT:
            raise ProtocolError(f"session for {voter_id} not finalizable (state {session.state})")
        row = self.rows[voter_id]
        if fin_commitment(voter_id, finalization_code) != row.fin_commitment:
            raise ProtocolError(f"finalization code for {voter_id} does not open the commitment")

        ballot_seq, w = self._recorded_ballot(voter_id)
        conf_context = b"conf|" + voter_id.encode()
        ctx.counters.confirm_decryptions += 1
        conf_shares = [
            partial_decrypt(s, row.conf_ciphertext, rng.child(f"conf-{s.index}"), conf_context)
            for s in ctx.c_shares
        ]
        conf_el = combine_shares(conf_shares, row.conf_ciphertext, ctx.threshold, conf_context)
        confirmation = str(decode_int(ctx.params, conf_el))
        self.ballot_box.append((voter_id, w))
        self.board.append(
            "finalization",
            {
                "voter_id": voter_id,
                "ballot_seq": ballot_seq,
                "w": wire.ct_to_wire(w),
                "conf_shares": [wire.dshare_to_wire(s) for s in conf_shares],
            },
        )
        session.state = FINALIZED
        return confirmation

    def _recorded_ballot(self, voter_id: str) -> tuple[int, Ciphertext]:
        for entry in reversed(self.board.read_all("ballot")):
            payload = json.loads(entry.payload)
            if payload["voter_id"] == voter_id:
                return entry.seq, wire.ct_from_wire(self.ctx.params, payload["w"])
        raise ProtocolError(f"no recorded ballot for {voter_id}")


def voter_check_codes(view: VoterView, codes: list[int] | None) -> bool:
    """Accept iff every option's returned code equals the printed code next to
    the voter's own choice."""
    if codes is None or len(codes) != len(view.choices):
        return False
    for choice, pair, code in zip(view.choices, view.sheet.return_codes, codes):
        if pair[choice] != code:
            return False
    return True


@dataclass
class TallyResult:
    counts: list[int]
    total_ballots: int
    rejected: list[tuple[str, str]]


def tally(ctx: ElectionContext, ballot_box: list[tuple[str, Ciphertext]], board: Board, rng: Rng) -> TallyResult:
    """Stand-in tally: verifiably threshold-decrypt every finalized ballot and
    decode the option products; malformed plaintexts are rejected and flagged."""
    counts = [0] * ctx.options.k
    rejected = []
    transcripts = []
    for voter_id, w in ballot_box:
        ctx.counters.tally_decryptions += 1
        shares = [
            partial_decrypt(s, w, rng.child(f"tally-{voter_id}-{s.index}"), ctx.tally_context(voter_id))
            for s in ctx.e_shares
        ]
        plaintext = combine_shares(shares, w, ctx.threshold, ctx.tally_context(voter_id))
        entry = {
            "voter_id": voter_id,
            "w": wire.ct_to_wire(w),
            "shares": [wire.dshare_to_wire(s) for s in shares],
            "plaintext": plaintext.value,
        }
        try:
            bits = ctx.options.decode_choice(plaintext)
        except MalformedPlaintextError as exc:
            rejected.append((voter_id, str(exc)))
            entry["rejected"] = str(exc)
            transcripts.append(entry)
            continue
        entry["choices"] = bits
        transcripts.append(entry)
        for j, bit in enumerate(bits):
            counts[j] += bit
    board.append(
        "tally",
        {"counts": counts, "rejected": [[v, r] for v, r in rejected], "transcripts": transcripts},
    )
    return TallyResult(counts=counts, total_ballots=len(ballot_box), rejected=rejected)
