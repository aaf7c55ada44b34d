"""Verifiable generation of per-voter code tables and printed ballot sheets.

Pipeline, run once per election:

1. For every option, deterministically encrypt the full code list twice over
   (encoded code under the code key, raw code under the printing key), all
   with randomness 1, so any observer can recompute the list.
2. Shuffle each option's list of ciphertext *pairs* through a verifiable mix
   (same permutation for both pair components, independent re-randomization).
   The mix proof is cut-and-choose over lambda shadow mixes.
3. Organize the shuffled streams into one record of eight ciphertexts per
   voter and option: four printing-key components carrying (0, no-code,
   1, yes-code) and four public components carrying the no/yes cells.
4. Each teller in turn micro-mixes every record: re-encrypt everything and,
   on a private coin flip, swap the no/yes halves, proving in zero knowledge
   that the output re-encrypts the input or its swap.  The XOR of the teller
   coins becomes the voter's flip bit for that option.
5. Split: public components become the published code table; printing-key
   components go to the printing facility, which decrypts them into ballot
   sheets (the flip bit is implicit in whether 0 or 1 comes first).

Everything a teller publishes is deterministic or proof-carrying, so the full
pipeline re-verifies from the transcript alone.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canon import digest, fs_challenge, hash_hex
from .elgamal import Ciphertext, encrypt, reencrypt, decrypt
from .encoding import CodeEncoding, OptionEncoding, EncodingError
from .group import GroupElement, GroupParams, decode_int, encode_int
from .proofs import OrProof, or_prove, or_verify
from .rng import Rng

Record = tuple[Ciphertext, ...]  # 8 components
Pair = tuple[Ciphertext, Ciphertext]  # (code-key ct, printing-key ct)

_SWAP = (2, 3, 0, 1, 6, 7, 4, 5)
_FLIP_LABEL = "micro-mix-flip"

# positions 0-3 under the printing key, 4/6 under the election key, 5/7 under
# the code key
_KEY_GROUPS = ((0, 1, 2, 3), (4, 6), (5, 7))


class CodegenError(ValueError):
    pass


@dataclass(frozen=True)
class CodeTableRow:
    voter_id: str
    fin_commitment: str
    conf_ciphertext: Ciphertext
    cells: tuple[tuple[Pair, Pair], ...]  # per option: (u^0, u^1), each (choice ct, code ct)


@dataclass(frozen=True)
class BallotSheet:
    voter_id: str
    auth_code: str
    finalization_code: str
    confirmation_code: str
    flip_bits: tuple[int, ...]
    return_codes: tuple[tuple[int, int], ...]  # per option: (no-code, yes-code)


@dataclass(frozen=True)
class MixOpen:
    side: str  # "input": shadow re-derived from the input; "bridge": output re-derived from the shadow
    perm: tuple[int, ...]
    r_code: tuple[int, ...]
    r_print: tuple[int, ...]


@dataclass(frozen=True)
class MixProof:
    lam: int
    shadows: tuple[tuple[Pair, ...], ...]
    opens: tuple[MixOpen, ...]


@dataclass(frozen=True)
class TellerPass:
    teller_index: int
    outputs: tuple[tuple[Record, ...], ...]  # [voter][option]
    flip_proofs: tuple[tuple[OrProof, ...], ...] | None


@dataclass(frozen=True)
class OptionStream:
    deterministic: tuple[Pair, ...]
    shuffled: tuple[Pair, ...]
    mix_proof: MixProof | None


@dataclass(frozen=True)
class CodegenTranscript:
    streams: tuple[OptionStream, ...]  # per option
    initial_records: tuple[tuple[Record, ...], ...]  # [voter][option]
    teller_passes: tuple[TellerPass, ...]
    rows: tuple[CodeTableRow, ...]


@dataclass(frozen=True)
class CodegenOutput:
    transcript: CodegenTranscript
    sheets: tuple[BallotSheet, ...]


def generate_code_lists(
    j: int, m: int, codes: CodeEncoding, pk_c: GroupElement, pk_p: GroupElement
) -> list[Pair]:
    """Deterministic per-option code list; randomness fixed to 1 throughout."""
    params = pk_c.params
    out = []
    for c in range(1, m + 1):
        out.append(
            (
                encrypt(pk_c, codes.delta(j, c), 1),
                encrypt(pk_p, encode_int(params, c), 1),
            )
        )
    return out


def paired_shuffle(
    pairs: list[Pair],
    pk_c: GroupElement,
    pk_p: GroupElement,
    rng: Rng,
    lam: int = 16,
    context: bytes = b"",
    with_proof: bool = True,
) -> tuple[list[Pair], MixProof | None]:
    """Permute and re-randomize pairs, same permutation across components.

    The proof is cut-and-choose: lambda shadow mixes are published, a
    Fiat-Shamir coin per shadow decides whether to open the shadow against the
    input or the bridge from the shadow to the real output.  An output that is
    not a permuted re-encryption survives with probability at most 2^-lambda.
    """
    if not 1 <= lam <= 128:
        raise CodegenError("lambda must be in [1, 128]")
    params = pk_c.params
    q = params.q
    n = len(pairs)

    def mix(src, perm, rc, rp):
        return [
            (reencrypt(pk_c, src[perm[i]][0], rc[i]), reencrypt(pk_p, src[perm[i]][1], rp[i]))
            for i in range(n)
        ]

    perm = rng.permutation(n)
    r_code = [rng.scalar(q) for _ in range(n)]
    r_print = [rng.scalar(q) for _ in range(n)]
    shuffled = mix(pairs, perm, r_code, r_print)
    if not with_proof:
        return shuffled, None

    shadow_params = []
    shadows = []
    for _ in range(lam):
        sp = rng.permutation(n)
        sc = [rng.scalar(q) for _ in range(n)]
        spr = [rng.scalar(q) for _ in range(n)]
        shadow_params.append((sp, sc, spr))
        shadows.append(tuple(mix(pairs, sp, sc, spr)))

    bits = _mix_challenge_bits(lam, context, pairs, shuffled, shadows)
    opens = []
    for s, bit in enumerate(bits):
        sp, sc, spr = shadow_params[s]
        if bit == 0:
            opens.append(
                MixOpen(side="input", perm=tuple(sp), r_code=tuple(sc), r_print=tuple(spr))
            )
        else:
            inv_sp = [0] * n
            for pos, src in enumerate(sp):
                inv_sp[src] = pos
            tau = [inv_sp[perm[i]] for i in range(n)]
            d_code = [(r_code[i] - sc[tau[i]]) % q for i in range(n)]
            d_print = [(r_print[i] - spr[tau[i]]) % q for i in range(n)]
            opens.append(
                MixOpen(side="bridge", perm=tuple(tau), r_code=tuple(d_code), r_print=tuple(d_print))
            )
    proof = MixProof(lam=lam, shadows=tuple(shadows), opens=tuple(opens))
    return shuffled, proof


def _mix_challenge_bits(lam, context, inputs, outputs, shadows) -> list[int]:
    flat = []
    for pair in list(inputs) + list(outputs):
        flat.extend(pair)
    for shadow in shadows:
        for pair in shadow:
            flat.extend(pair)
    seed = digest("mix-challenge", context, flat)
    bits = []
    counter = 0
    material = seed
    while len(bits) < lam:
        for byte in material:
            for k in range(8):
                bits.append((byte >> k) & 1)
                if len(bits) == lam:
                    return bits
        counter += 1
        material = digest("mix-challenge-ext", seed, counter)
    return bits


def verify_paired_shuffle(
    inputs: list[Pair],
    outputs: list[Pair],
    proof: MixProof,
    pk_c: GroupElement,
    pk_p: GroupElement,
    context: bytes = b"",
) -> bool:
    n = len(inputs)
    if len(outputs) != n or len(proof.shadows) != proof.lam or len(proof.opens) != proof.lam:
        return False
    bits = _mix_challenge_bits(proof.lam, context, inputs, outputs, list(proof.shadows))
    for shadow, open_, bit in zip(proof.shadows, proof.opens, bits):
        if len(shadow) != n:
            return False
        expected_side = "input" if bit == 0 else "bridge"
        if open_.side != expected_side:
            return False
        if sorted(open_.perm) != list(range(n)):
            return False
        if bit == 0:
            src, dst = inputs, shadow
        else:
            src, dst = shadow, outputs
        for i in range(n):
            want = (
                reencrypt(pk_c, src[open_.perm[i]][0], open_.r_code[i]),
                reencrypt(pk_p, src[open_.perm[i]][1], open_.r_print[i]),
            )
            if want != tuple(dst[i]):
                return False
    return True


def deterministic_components(
    params: GroupParams, options: OptionEncoding, pk_e: GroupElement, pk_p: GroupElement
) -> dict:
    """The record components every observer recomputes: encryptions with
    randomness 1 of the bit markers and the option encodings."""
    return {
        "penc0": encrypt(pk_p, encode_int(params, 0), 1),
        "penc1": encrypt(pk_p, encode_int(params, 1), 1),
        "eenc1": encrypt(pk_e, params.one(), 1),
        "eenc_gamma": [encrypt(pk_e, options.gamma(j), 1) for j in range(1, options.k + 1)],
    }


def assemble_records(
    shuffled_streams: list[list[Pair]],
    options: OptionEncoding,
    n_voters: int,
    params: GroupParams,
    pk_e: GroupElement,
    pk_p: GroupElement,
) -> list[list[Record]]:
    """Consume two shuffled codes per voter per option and build the records."""
    k = options.k
    if len(shuffled_streams) != k:
        raise CodegenError("one shuffled stream per option required")
    for stream in shuffled_streams:
        if len(stream) < 2 * n_voters:
            raise CodegenError(
                f"insufficient codes: {len(stream)} for {n_voters} voters (need {2 * n_voters})"
            )
    det = deterministic_components(params, options, pk_e, pk_p)
    records = []
    for v in range(n_voters):
        per_option = []
        for j in range(1, k + 1):
            no_ct, no_print = shuffled_streams[j - 1][2 * v]
            yes_ct, yes_print = shuffled_streams[j - 1][2 * v + 1]
            per_option.append(
                (
                    det["penc0"],
                    no_print,
                    det["penc1"],
                    yes_print,
                    det["eenc1"],
                    no_ct,
                    det["eenc_gamma"][j - 1],
                    yes_ct,
                )
            )
        records.append(per_option)
    return records


def swap_record(record: Record) -> Record:
    return tuple(record[i] for i in _SWAP)


def _record_keys(pk_e: GroupElement, pk_c: GroupElement, pk_p: GroupElement):
    return (pk_p, pk_p, pk_p, pk_p, pk_e, pk_c, pk_e, pk_c)


def _flip_relation_groups(record: Record, candidate: Record, output: Record, keys, weights, params):
    """Random-linear-combination relation groups tying output/candidate
    quotients to one exponent per key."""
    groups = []
    for positions in _KEY_GROUPS:
        a_acc = params.one()
        b_acc = params.one()
        for j in positions:
            qa = output[j].a / candidate[j].a
            qb = output[j].b / candidate[j].b
            a_acc = a_acc * qa.pow(weights[j])
            b_acc = b_acc * qb.pow(weights[j])
        key = keys[positions[0]]
        groups.append([(params.generator(), a_acc), (key, b_acc)])
    return groups


def _flip_weights(q, context, record, output):
    material = list(record) + list(output)
    return [fs_challenge(q, f"flip-weight-{j}", context, material) for j in range(8)]


def micro_mix(
    record: Record,
    pk_e: GroupElement,
    pk_c: GroupElement,
    pk_p: GroupElement,
    rng: Rng,
    context: bytes = b"",
    with_proof: bool = True,
) -> tuple[Record, OrProof | None, int]:
    """One teller's pass over one record: re-encrypt all eight components and,
    if the private coin says so, swap the no/yes halves.  The proof shows the
    output re-encrypts the record or its swap without revealing which."""
    params = pk_e.params
    q = params.q
    keys = _record_keys(pk_e, pk_c, pk_p)
    flip = rng.bit()
    base = swap_record(record) if flip else record
    rands = [rng.scalar(q) for _ in range(8)]
    output = tuple(reencrypt(keys[j], base[j], rands[j]) for j in range(8))
    if not with_proof:
        return output, None, flip

    weights = _flip_weights(q, context, record, output)
    swapped = swap_record(record)
    branch0 = _flip_relation_groups(record, record, output, keys, weights, params)
    branch1 = _flip_relation_groups(record, swapped, output, keys, weights, params)
    witnesses = []
    for positions in _KEY_GROUPS:
        witnesses.append(sum(weights[j] * rands[j] for j in positions) % q)
    proof = or_prove([branch0, branch1], witnesses, flip, _FLIP_LABEL, context, rng)
    return output, proof, flip


def verify_micro_mix(
    record: Record,
    output: Record,
    proof: OrProof,
    pk_e: GroupElement,
    pk_c: GroupElement,
    pk_p: GroupElement,
    context: bytes = b"",
) -> bool:
    params = pk_e.params
    keys = _record_keys(pk_e, pk_c, pk_p)
    weights = _flip_weights(params.q, context, record, output)
    branch0 = _flip_relation_groups(record, record, output, keys, weights, params)
    branch1 = _flip_relation_groups(record, swap_record(record), output, keys, weights, params)
    return or_verify([branch0, branch1], proof, _FLIP_LABEL, context)


@dataclass(frozen=True)
class FinConf:
    fin_code: str
    fin_commitment: str
    conf_value: int
    conf_code: str
    conf_ciphertext: Ciphertext


def fin_commitment(voter_id: str, fin_code: str) -> str:
    return hash_hex("fin-commit", voter_id, fin_code)


def generate_fin_conf(voter_id: str, rng: Rng, pk_c: GroupElement) -> FinConf:
    """Finalization commitment (binding via the hash, hiding via the random
    code) and the threshold-decryptable confirmation code."""
    params = pk_c.params
    fin_code = rng.hex_token(16)
    conf_space = min(2**30, params.q - 2)
    conf_value = rng.randrange(conf_space)
    conf_ct = encrypt(pk_c, encode_int(params, conf_value), rng.scalar(params.q))
    return FinConf(
        fin_code=fin_code,
        fin_commitment=fin_commitment(voter_id, fin_code),
        conf_value=conf_value,
        conf_code=str(conf_value),
        conf_ciphertext=conf_ct,
    )


def split_outputs(
    final_records: list[list[Record]],
    printing_sk: int,
    fin_confs: list[FinConf],
    voter_ids: list[str],
    m: int,
    params: GroupParams,
    rng: Rng,
) -> tuple[list[CodeTableRow], list[BallotSheet]]:
    """Publish the election/code-key cells; decrypt the printing-key parts into
    ballot sheets.  Flip bits are recovered from the position of plaintext 0."""
    rows = []
    sheets = []
    for v, voter_id in enumerate(voter_ids):
        cells = []
        flip_bits = []
        return_codes = []
        for record in final_records[v]:
            marker_first = decode_int(params, decrypt(printing_sk, record[0]))
            code_first = decode_int(params, decrypt(printing_sk, record[1]))
            marker_second = decode_int(params, decrypt(printing_sk, record[2]))
            code_second = decode_int(params, decrypt(printing_sk, record[3]))
            if sorted((marker_first, marker_second)) != [0, 1]:
                raise CodegenError(
                    f"voter {voter_id}: printing markers {marker_first},{marker_second} not a 0/1 pair"
                )
            for code in (code_first, code_second):
                if not 1 <= code <= m:
                    raise CodegenError(f"voter {voter_id}: printed code {code} outside [1, {m}]")
            if marker_first == 0:
                flip_bits.append(0)
                return_codes.append((code_first, code_second))
            else:
                flip_bits.append(1)
                return_codes.append((code_second, code_first))
            cells.append(((record[4], record[5]), (record[6], record[7])))
        fc = fin_confs[v]
        rows.append(
            CodeTableRow(
                voter_id=voter_id,
                fin_commitment=fc.fin_commitment,
                conf_ciphertext=fc.conf_ciphertext,
                cells=tuple(cells),
            )
        )
        sheets.append(
            BallotSheet(
                voter_id=voter_id,
                auth_code=rng.child(f"auth-{voter_id}").hex_token(12),
                finalization_code=fc.fin_code,
                confirmation_code=fc.conf_code,
                flip_bits=tuple(flip_bits),
                return_codes=tuple(return_codes),
            )
        )
    return rows, sheets


def render_sheet(sheet: BallotSheet) -> str:
    """Human-printable ballot sheet, the form the printing facility mails out."""
    lines = [
        f"BALLOT SHEET             {sheet.voter_id}",
        f"authentication code      {sheet.auth_code}",
        f"finalization code        {sheet.finalization_code}",
        f"confirmation code        {sheet.confirmation_code}",
        f"flip bits                {' '.join(str(b) for b in sheet.flip_bits)}",
        "option   code for NO   code for YES",
    ]
    for j, (no_code, yes_code) in enumerate(sheet.return_codes, start=1):
        lines.append(f"{j:>6}   {no_code:>11}   {yes_code:>12}")
    return "\n".join(lines)


def run_codegen(
    params: GroupParams,
    options: OptionEncoding,
    codes: CodeEncoding,
    pk_e: GroupElement,
    pk_c: GroupElement,
    pk_p: GroupElement,
    printing_sk: int,
    voter_ids: list[str],
    n_tellers: int,
    rng: Rng,
    lam: int = 16,
    with_proofs: bool = True,
    context: bytes = b"",
) -> CodegenOutput:
    """Run the whole pipeline. with_proofs=False skips mix and flip proofs for
    high-trial experiments; the produced tables are distributed identically."""
    n = len(voter_ids)
    m = codes.m
    if m <= 2 * n:
        raise CodegenError(f"code space m={m} must exceed 2n={2 * n}")
    k = options.k

    streams = []
    shuffled_streams = []
    for j in range(1, k + 1):
        det = generate_code_lists(j, m, codes, pk_c, pk_p)
        shuffled, proof = paired_shuffle(
            det,
            pk_c,
            pk_p,
            rng.child(f"shuffle-{j}"),
            lam=lam,
            context=context + b"|option:%d" % j,
            with_proof=with_proofs,
        )
        streams.append(OptionStream(deterministic=tuple(det), shuffled=tuple(shuffled), mix_proof=proof))
        shuffled_streams.append(shuffled)

    records = assemble_records(shuffled_streams, options, n, params, pk_e, pk_p)
    initial_records = tuple(tuple(per_option) for per_option in records)

    passes = []
    current = records
    for teller in range(1, n_tellers + 1):
        teller_rng = rng.child(f"micro-mix-{teller}")
        outputs = []
        proofs = []
        for v in range(n):
            out_row = []
            proof_row = []
            for j in range(k):
                rec_context = context + b"|mix:%d:%d:%d" % (teller, v, j)
                out, proof, _flip = micro_mix(
                    current[v][j],
                    pk_e,
                    pk_c,
                    pk_p,
                    teller_rng.child(f"rec-{v}-{j}"),
                    context=rec_context,
                    with_proof=with_proofs,
                )
                out_row.append(out)
                proof_row.append(proof)
            outputs.append(tuple(out_row))
            proofs.append(tuple(proof_row))
        passes.append(
            TellerPass(
                teller_index=teller,
                outputs=tuple(outputs),
                flip_proofs=tuple(proofs) if with_proofs else None,
            )
        )
        current = [list(row) for row in passes[-1].outputs]

    fin_confs = [generate_fin_conf(vid, rng.child(f"fin-conf-{vid}"), pk_c) for vid in voter_ids]
    rows, sheets = split_outputs(
        current, printing_sk, fin_confs, voter_ids, m, params, rng.child("sheets")
    )
    transcript = CodegenTranscript(
        streams=tuple(streams),
        initial_records=initial_records,
        teller_passes=tuple(passes),
        rows=tuple(rows),
    )
    return CodegenOutput(transcript=transcript, sheets=tuple(sheets))


def verify_codegen(
    transcript: CodegenTranscript,
    params: GroupParams,
    options: OptionEncoding,
    codes: CodeEncoding,
    pk_e: GroupElement,
    pk_c: GroupElement,
    pk_p: GroupElement,
    n_voters: int,
    context: bytes = b"",
) -> bool:
    """Re-check the whole pipeline: deterministic steps by recomputation,
    shuffles and micro-mixes by their proofs, the published table by equality
    with the final records."""
    k = options.k
    m = codes.m
    if len(transcript.streams) != k:
        return False

    for j, stream in enumerate(transcript.streams, start=1):
        try:
            expected = generate_code_lists(j, m, codes, pk_c, pk_p)
        except EncodingError:
            return False
        if list(stream.deterministic) != expected:
            return False
        if stream.mix_proof is None:
            return False
        if not verify_paired_shuffle(
            expected,
            list(stream.shuffled),
            stream.mix_proof,
            pk_c,
            pk_p,
            context=context + b"|option:%d" % j,
        ):
            return False

    try:
        expected_records = assemble_records(
            [list(s.shuffled) for s in transcript.streams], options, n_voters, params, pk_e, pk_p
        )
    except CodegenError:
        return False
    if [list(row) for row in transcript.initial_records] != [list(r) for r in expected_records]:
        return False

    current = transcript.initial_records
    for teller_no, teller_pass in enumerate(transcript.teller_passes, start=1):
        if teller_pass.flip_proofs is None:
            return False
        if len(teller_pass.outputs) != n_voters:
            return False
        for v in range(n_voters):
            if len(teller_pass.outputs[v]) != k:
                return False
            for j in range(k):
                proof = teller_pass.flip_proofs[v][j]
                if proof is None:
                    return False
                rec_context = context + b"|mix:%d:%d:%d" % (teller_pass.teller_index, v, j)
                if not verify_micro_mix(
                    current[v][j],
                    teller_pass.outputs[v][j],
                    proof,
                    pk_e,
                    pk_c,
                    pk_p,
                    context=rec_context,
                ):
                    return False
        current = teller_pass.outputs

    if len(transcript.rows) != n_voters:
        return False
    for v, row in enumerate(transcript.rows):
        if len(row.cells) != k:
            return False
        for j in range(k):
            record = current[v][j]
            if row.cells[j] != ((record[4], record[5]), (record[6], record[7])):
                return False
    return True
