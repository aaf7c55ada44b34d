"""JSON-safe wire forms for everything published on the board.

Deserialization reconstructs group elements through the validating
constructor, so malformed or non-member values are rejected at the boundary.
"""

from __future__ import annotations

from .codegen import (
    BallotSheet,
    CodegenTranscript,
    CodeTableRow,
    MixOpen,
    MixProof,
    OptionStream,
    TellerPass,
)
from .elgamal import Cca2Ciphertext, Ciphertext, DecryptionShare, EqDlogProof
from .group import GroupElement, GroupParams
from .proofs import OrBranch, OrProof, PetStep, PetTranscript, SchnorrProof


def element_to_wire(e: GroupElement) -> int:
    return e.value


def element_from_wire(params: GroupParams, v: int) -> GroupElement:
    return GroupElement(v, params)


def ct_to_wire(c: Ciphertext) -> list[int]:
    return [c.a.value, c.b.value]


def ct_from_wire(params: GroupParams, w) -> Ciphertext:
    return Ciphertext(a=element_from_wire(params, w[0]), b=element_from_wire(params, w[1]))


def cca2_to_wire(c: Cca2Ciphertext) -> list[int]:
    return [c.u1.value, c.u2.value, c.e.value, c.v.value]


def cca2_from_wire(params: GroupParams, w) -> Cca2Ciphertext:
    u1, u2, e, v = (element_from_wire(params, x) for x in w)
    return Cca2Ciphertext(u1=u1, u2=u2, e=e, v=v)


def schnorr_to_wire(p: SchnorrProof) -> dict:
    return {"commitment": p.commitment.value, "challenge": p.challenge, "response": p.response}


def schnorr_from_wire(params: GroupParams, w) -> SchnorrProof:
    return SchnorrProof(
        commitment=element_from_wire(params, w["commitment"]),
        challenge=w["challenge"],
        response=w["response"],
    )


def eqdlog_to_wire(p: EqDlogProof) -> dict:
    return {
        "commitments": [c.value for c in p.commitments],
        "challenge": p.challenge,
        "response": p.response,
    }


def eqdlog_from_wire(params: GroupParams, w) -> EqDlogProof:
    return EqDlogProof(
        commitments=tuple(element_from_wire(params, c) for c in w["commitments"]),
        challenge=w["challenge"],
        response=w["response"],
    )


def dshare_to_wire(s: DecryptionShare) -> dict:
    return {
        "index": s.index,
        "value": s.value.value,
        "public_key": s.public_key.value,
        "proof": eqdlog_to_wire(s.proof),
    }


def dshare_from_wire(params: GroupParams, w) -> DecryptionShare:
    return DecryptionShare(
        index=w["index"],
        value=element_from_wire(params, w["value"]),
        public_key=element_from_wire(params, w["public_key"]),
        proof=eqdlog_from_wire(params, w["proof"]),
    )


def pet_to_wire(t: PetTranscript) -> dict:
    return {
        "steps": [
            {
                "index": s.index,
                "blinded": ct_to_wire(s.blinded),
                "commitment": s.commitment.value,
                "proof": eqdlog_to_wire(s.proof),
            }
            for s in t.steps
        ],
        "combined": ct_to_wire(t.combined),
        "shares": [dshare_to_wire(s) for s in t.shares],
        "plaintext": t.plaintext.value,
        "verdict": t.verdict,
    }


def pet_from_wire(params: GroupParams, w) -> PetTranscript:
    return PetTranscript(
        steps=tuple(
            PetStep(
                index=s["index"],
                blinded=ct_from_wire(params, s["blinded"]),
                commitment=element_from_wire(params, s["commitment"]),
                proof=eqdlog_from_wire(params, s["proof"]),
            )
            for s in w["steps"]
        ),
        combined=ct_from_wire(params, w["combined"]),
        shares=tuple(dshare_from_wire(params, s) for s in w["shares"]),
        plaintext=element_from_wire(params, w["plaintext"]),
        verdict=w["verdict"],
    )


def orproof_to_wire(p: OrProof) -> dict:
    return {
        "branches": [
            {
                "commitments": [[c.value for c in group] for group in b.commitments],
                "challenge": b.challenge,
                "responses": list(b.responses),
            }
            for b in p.branches
        ]
    }


def orproof_from_wire(params: GroupParams, w) -> OrProof:
    return OrProof(
        branches=tuple(
            OrBranch(
                commitments=tuple(
                    tuple(element_from_wire(params, c) for c in group) for group in b["commitments"]
                ),
                challenge=b["challenge"],
                responses=tuple(b["responses"]),
            )
            for b in w["branches"]
        )
    )


def _pair_to_wire(pair) -> list:
    return [ct_to_wire(pair[0]), ct_to_wire(pair[1])]


def _pair_from_wire(params, w):
    return (ct_from_wire(params, w[0]), ct_from_wire(params, w[1]))


def mixproof_to_wire(p: MixProof) -> dict:
    return {
        "lam": p.lam,
        "shadows": [[_pair_to_wire(pair) for pair in shadow] for shadow in p.shadows],
        "opens": [
            {
                "side": o.side,
                "perm": list(o.perm),
                "r_code": list(o.r_code),
                "r_print": list(o.r_print),
            }
            for o in p.opens
        ],
    }


def mixproof_from_wire(params: GroupParams, w) -> MixProof:
    return MixProof(
        lam=w["lam"],
        shadows=tuple(tuple(_pair_from_wire(params, pair) for pair in shadow) for shadow in w["shadows"]),
        opens=tuple(
            MixOpen(
                side=o["side"],
                perm=tuple(o["perm"]),
                r_code=tuple(o["r_code"]),
                r_print=tuple(o["r_print"]),
            )
            for o in w["opens"]
        ),
    )


def record_to_wire(record) -> list:
    return [ct_to_wire(c) for c in record]


def record_from_wire(params, w):
    return tuple(ct_from_wire(params, c) for c in w)


def row_to_wire(row: CodeTableRow) -> dict:
    return {
        "voter_id": row.voter_id,
        "fin_commitment": row.fin_commitment,
        "conf_ciphertext": ct_to_wire(row.conf_ciphertext),
        "cells": [
            [[ct_to_wire(cell[0]), ct_to_wire(cell[1])] for cell in option_cells]
            for option_cells in row.cells
        ],
    }


def row_from_wire(params: GroupParams, w) -> CodeTableRow:
    return CodeTableRow(
        voter_id=w["voter_id"],
        fin_commitment=w["fin_commitment"],
        conf_ciphertext=ct_from_wire(params, w["conf_ciphertext"]),
        cells=tuple(
            (
                (ct_from_wire(params, oc[0][0]), ct_from_wire(params, oc[0][1])),
                (ct_from_wire(params, oc[1][0]), ct_from_wire(params, oc[1][1])),
            )
            for oc in w["cells"]
        ),
    )


def transcript_to_wire(t: CodegenTranscript) -> dict:
    return {
        "streams": [
            {
                "deterministic": [_pair_to_wire(p) for p in s.deterministic],
                "shuffled": [_pair_to_wire(p) for p in s.shuffled],
                "mix_proof": mixproof_to_wire(s.mix_proof) if s.mix_proof else None,
            }
            for s in t.streams
        ],
        "initial_records": [[record_to_wire(r) for r in row] for row in t.initial_records],
        "teller_passes": [
            {
                "teller_index": tp.teller_index,
                "outputs": [[record_to_wire(r) for r in row] for row in tp.outputs],
                "flip_proofs": (
                    [[orproof_to_wire(p) for p in row] for row in tp.flip_proofs]
                    if tp.flip_proofs
                    else None
                ),
            }
            for tp in t.teller_passes
        ],
        "rows": [row_to_wire(r) for r in t.rows],
    }


def transcript_from_wire(params: GroupParams, w) -> CodegenTranscript:
    return CodegenTranscript(
        streams=tuple(
            OptionStream(
                deterministic=tuple(_pair_from_wire(params, p) for p in s["deterministic"]),
                shuffled=tuple(_pair_from_wire(params, p) for p in s["shuffled"]),
                mix_proof=mixproof_from_wire(params, s["mix_proof"]) if s["mix_proof"] else None,
            )
            for s in w["streams"]
        ),
        initial_records=tuple(
            tuple(record_from_wire(params, r) for r in row) for row in w["initial_records"]
        ),
        teller_passes=tuple(
            TellerPass(
                teller_index=tp["teller_index"],
                outputs=tuple(tuple(record_from_wire(params, r) for r in row) for row in tp["outputs"]),
                flip_proofs=(
                    tuple(tuple(orproof_from_wire(params, p) for p in row) for row in tp["flip_proofs"])
                    if tp["flip_proofs"]
                    else None
                ),
            )
            for tp in w["teller_passes"]
        ),
        rows=tuple(row_from_wire(params, r) for r in w["rows"]),
    )


def sheet_to_wire(s: BallotSheet) -> dict:
    return {
        "voter_id": s.voter_id,
        "auth_code": s.auth_code,
        "finalization_code": s.finalization_code,
        "confirmation_code": s.confirmation_code,
        "flip_bits": list(s.flip_bits),
        "return_codes": [list(rc) for rc in s.return_codes],
    }


def sheet_from_wire(w) -> BallotSheet:
    return BallotSheet(
        voter_id=w["voter_id"],
        auth_code=w["auth_code"],
        finalization_code=w["finalization_code"],
        confirmation_code=w["confirmation_code"],
        flip_bits=tuple(w["flip_bits"]),
        return_codes=tuple((rc[0], rc[1]) for rc in w["return_codes"]),
    )
