import dataclasses

import pytest

from petvote.codegen import (
    CodegenError,
    assemble_records,
    fin_commitment,
    generate_code_lists,
    generate_fin_conf,
    micro_mix,
    paired_shuffle,
    render_sheet as codegen_render,
    run_codegen,
    swap_record,
    verify_codegen,
    verify_micro_mix,
    verify_paired_shuffle,
)
from petvote.elgamal import combine_shares, decrypt, dkg, encrypt, partial_decrypt, reconstruct_secret
from petvote.encoding import CodeEncoding, OptionEncoding
from petvote.group import decode_int, encode_int
from petvote.rng import Rng

K, L, M, N_VOTERS, N_TELLERS, T = 2, 3, 8, 3, 3, 2


@pytest.fixture(scope="module")
def stage(params64):
    rng = Rng("codegen-stage")
    options = OptionEncoding.build(params64, K)
    codes = CodeEncoding.build(params64, K, L, M, "sparse", option_encoding=options)
    e_pk, e_shares = dkg(params64, N_TELLERS, T, rng.child("e"))
    c_pk, c_shares = dkg(params64, N_TELLERS, T, rng.child("c"))
    from petvote.elgamal import keygen

    print_kp = keygen(params64, rng.child("p"))
    e_sk = reconstruct_secret(e_shares[:T], params64.q)
    c_sk = reconstruct_secret(c_shares[:T], params64.q)
    return {
        "params": params64,
        "options": options,
        "codes": codes,
        "e_pk": e_pk,
        "c_pk": c_pk,
        "print_kp": print_kp,
        "e_shares": e_shares,
        "c_shares": c_shares,
        "e_sk": e_sk,
        "c_sk": c_sk,
    }


def test_code_lists_deterministic(stage):
    a = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    b = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    assert a == b
    assert len(a) == M


def test_code_lists_first_entry(stage):
    params = stage["params"]
    lists = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    # code 1 has the all-zero bit pattern: encoded delta is the identity
    assert lists[0][0] == encrypt(stage["c_pk"], params.one(), 1)
    assert lists[0][1] == encrypt(stage["print_kp"].pk, encode_int(params, 1), 1)


def test_code_lists_distinct_plaintext_pairs(stage):
    params = stage["params"]
    lists = generate_code_lists(2, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    plain = [
        (decrypt(stage["c_sk"], code_ct).value, decode_int(params, decrypt(stage["print_kp"].sk, print_ct)))
        for code_ct, print_ct in lists
    ]
    assert len(set(plain)) == M
    assert sorted(p[1] for p in plain) == list(range(1, M + 1))


def test_paired_shuffle_preserves_plaintexts(stage):
    params = stage["params"]
    inputs = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    shuffled, proof = paired_shuffle(
        inputs, stage["c_pk"], stage["print_kp"].pk, Rng("shuffle"), lam=8, context=b"t"
    )
    def plainpair(pair):
        return (
            decrypt(stage["c_sk"], pair[0]).value,
            decode_int(params, decrypt(stage["print_kp"].sk, pair[1])),
        )
    assert sorted(plainpair(p) for p in inputs) == sorted(plainpair(p) for p in shuffled)
    # pairing preserved: the decoded code matches its delta encoding
    for pair in shuffled:
        c = plainpair(pair)[1]
        assert stage["codes"].delta(1, c).value == plainpair(pair)[0]
    assert verify_paired_shuffle(inputs, shuffled, proof, stage["c_pk"], stage["print_kp"].pk, b"t")


def test_paired_shuffle_identity_with_zero_rng(stage, zero_rng):
    inputs = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    shuffled, _proof = paired_shuffle(
        inputs, stage["c_pk"], stage["print_kp"].pk, zero_rng, lam=2, with_proof=False
    )
    assert shuffled == inputs


def test_paired_shuffle_tamper_detected(stage):
    inputs = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    shuffled, proof = paired_shuffle(
        inputs, stage["c_pk"], stage["print_kp"].pk, Rng("shuffle-tamper"), lam=16, context=b"t"
    )
    g = stage["params"].generator()
    tampered = list(shuffled)
    tampered[3] = (type(shuffled[3][0])(a=shuffled[3][0].a * g, b=shuffled[3][0].b), shuffled[3][1])
    assert not verify_paired_shuffle(
        inputs, tampered, proof, stage["c_pk"], stage["print_kp"].pk, b"t"
    )


def test_paired_shuffle_wrong_context_fails(stage):
    inputs = generate_code_lists(1, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
    shuffled, proof = paired_shuffle(
        inputs, stage["c_pk"], stage["print_kp"].pk, Rng("ctx"), lam=8, context=b"ctx-a"
    )
    assert not verify_paired_shuffle(
        inputs, shuffled, proof, stage["c_pk"], stage["print_kp"].pk, b"ctx-b"
    )


def _shuffled_streams(stage, seed="streams"):
    streams = []
    for j in (1, 2):
        inputs = generate_code_lists(j, M, stage["codes"], stage["c_pk"], stage["print_kp"].pk)
        shuffled, _ = paired_shuffle(
            inputs, stage["c_pk"], stage["print_kp"].pk, Rng(f"{seed}-{j}"), with_proof=False
        )
        streams.append(shuffled)
    return streams


def test_assemble_records_shape_and_consistency(stage):
    params = stage["params"]
    streams = _shuffled_streams(stage)
    records = assemble_records(streams, stage["options"], N_VOTERS, params, stage["e_pk"], stage["print_kp"].pk)
    assert len(records) == N_VOTERS and all(len(r) == K for r in records)
    psk = stage["print_kp"].sk
    for v in range(N_VOTERS):
        for j in range(1, K + 1):
            rec = records[v][j - 1]
            assert decode_int(params, decrypt(psk, rec[0])) == 0
            assert decode_int(params, decrypt(psk, rec[2])) == 1
            assert decrypt(stage["e_sk"], rec[4]).value == 1
            assert decrypt(stage["e_sk"], rec[6]) == stage["options"].gamma(j)
            no_code = decode_int(params, decrypt(psk, rec[1]))
            yes_code = decode_int(params, decrypt(psk, rec[3]))
            # printing plaintexts match the code-key ciphertext plaintexts
            assert decrypt(stage["c_sk"], rec[5]) == stage["codes"].delta(j, no_code)
            assert decrypt(stage["c_sk"], rec[7]) == stage["codes"].delta(j, yes_code)


def test_assemble_records_insufficient_codes(stage):
    streams = _shuffled_streams(stage)
    with pytest.raises(CodegenError, match="insufficient"):
        assemble_records(
            streams, stage["options"], M, stage["params"], stage["e_pk"], stage["print_kp"].pk
        )


def _one_record(stage, seed="rec"):
    streams = _shuffled_streams(stage, seed)
    return assemble_records(
        streams, stage["options"], 1, stage["params"], stage["e_pk"], stage["print_kp"].pk
    )[0][0]


def _record_plaintexts(stage, record):
    params = stage["params"]
    psk = stage["print_kp"].sk
    return (
        decode_int(params, decrypt(psk, record[0])),
        decode_int(params, decrypt(psk, record[1])),
        decode_int(params, decrypt(psk, record[2])),
        decode_int(params, decrypt(psk, record[3])),
        decrypt(stage["e_sk"], record[4]).value,
        decrypt(stage["c_sk"], record[5]).value,
        decrypt(stage["e_sk"], record[6]).value,
        decrypt(stage["c_sk"], record[7]).value,
    )


def test_micro_mix_flip_semantics(stage, forced_rng_factory):
    record = _one_record(stage)
    before = _record_plaintexts(stage, record)

    class FlipRng(Rng):
        def __init__(self, bit):
            super().__init__("flip")
            self._bit = bit
        def bit(self):
            return self._bit
        def child(self, label):
            return self

    keys = dict(pk_e=stage["e_pk"], pk_c=stage["c_pk"], pk_p=stage["print_kp"].pk)
    out0, proof0, flip0 = micro_mix(record, rng=FlipRng(0), context=b"t", **keys)
    assert flip0 == 0
    assert _record_plaintexts(stage, out0) == before
    assert verify_micro_mix(record, out0, proof0, context=b"t", **keys)

    out1, proof1, flip1 = micro_mix(record, rng=FlipRng(1), context=b"t", **keys)
    assert flip1 == 1
    b = before
    assert _record_plaintexts(stage, out1) == (b[2], b[3], b[0], b[1], b[6], b[7], b[4], b[5])
    assert verify_micro_mix(record, out1, proof1, context=b"t", **keys)


def test_micro_mix_xor_composition(stage):
    record = _one_record(stage, "xor")
    keys = dict(pk_e=stage["e_pk"], pk_c=stage["c_pk"], pk_p=stage["print_kp"].pk)
    current = record
    total_flip = 0
    for teller in range(3):
        current, proof, flip = micro_mix(current, rng=Rng(f"teller-{teller}"), context=b"x", **keys)
        total_flip ^= flip
    expect = _record_plaintexts(stage, record)
    if total_flip:
        e = expect
        expect = (e[2], e[3], e[0], e[1], e[6], e[7], e[4], e[5])
    assert _record_plaintexts(stage, current) == expect


def test_micro_mix_proof_rejects_unrelated_output(stage):
    record = _one_record(stage, "bad")
    keys = dict(pk_e=stage["e_pk"], pk_c=stage["c_pk"], pk_p=stage["print_kp"].pk)
    out, proof, _ = micro_mix(record, rng=Rng("mm"), context=b"t", **keys)
    g = stage["params"].generator()
    mangled = list(out)
    mangled[5] = type(out[5])(a=out[5].a, b=out[5].b * g)
    assert not verify_micro_mix(record, tuple(mangled), proof, context=b"t", **keys)
    # proof bound to its input record too
    other = _one_record(stage, "other")
    assert not verify_micro_mix(other, out, proof, context=b"t", **keys)


def test_swap_record_involution(stage):
    record = _one_record(stage, "swap")
    assert swap_record(swap_record(record)) == record


def test_fin_conf(stage):
    fc = generate_fin_conf("V007", Rng("fin"), stage["c_pk"])
    assert fin_commitment("V007", fc.fin_code) == fc.fin_commitment
    assert fin_commitment("V007", "wrong") != fc.fin_commitment
    assert fin_commitment("V008", fc.fin_code) != fc.fin_commitment
    shares = [partial_decrypt(s, fc.conf_ciphertext, Rng(f"d{s.index}")) for s in stage["c_shares"]]
    plain = combine_shares(shares, fc.conf_ciphertext, T)
    assert str(decode_int(stage["params"], plain)) == fc.conf_code


def _full_run(stage, seed="full", with_proofs=True, n=N_VOTERS, lam=8):
    ids = [f"V{i:03d}" for i in range(n)]
    return ids, run_codegen(
        stage["params"],
        stage["options"],
        stage["codes"],
        stage["e_pk"],
        stage["c_pk"],
        stage["print_kp"].pk,
        stage["print_kp"].sk,
        ids,
        N_TELLERS,
        Rng(seed),
        lam=lam,
        with_proofs=with_proofs,
        context=b"test-election",
    )


def test_full_pipeline_linkage(stage):
    """Every sheet/table cell correspondence holds under full decryption."""
    params = stage["params"]
    ids, out = _full_run(stage)
    rows = {r.voter_id: r for r in out.transcript.rows}
    for sheet in out.sheets:
        row = rows[sheet.voter_id]
        for j in range(1, K + 1):
            b = sheet.flip_bits[j - 1]
            for v in (0, 1):
                choice_ct, code_ct = row.cells[j - 1][b ^ v]
                expected_choice = params.one() if v == 0 else stage["options"].gamma(j)
                assert decrypt(stage["e_sk"], choice_ct) == expected_choice
                expected_code = sheet.return_codes[j - 1][v]
                assert decrypt(stage["c_sk"], code_ct) == stage["codes"].delta(j, expected_code)


def test_codes_unique_across_voters(stage):
    _, out = _full_run(stage, "unique")
    for j in range(K):
        seen = []
        for sheet in out.sheets:
            seen.extend(sheet.return_codes[j])
        assert len(seen) == len(set(seen)) == 2 * N_VOTERS


def test_verify_codegen_honest(stage):
    _, out = _full_run(stage, "verify")
    assert verify_codegen(
        out.transcript,
        stage["params"],
        stage["options"],
        stage["codes"],
        stage["e_pk"],
        stage["c_pk"],
        stage["print_kp"].pk,
        N_VOTERS,
        context=b"test-election",
    )


def _verify(stage, transcript):
    return verify_codegen(
        transcript,
        stage["params"],
        stage["options"],
        stage["codes"],
        stage["e_pk"],
        stage["c_pk"],
        stage["print_kp"].pk,
        N_VOTERS,
        context=b"test-election",
    )


def test_verify_codegen_catches_mutations(stage):
    _, out = _full_run(stage, "mutate")
    t = out.transcript
    g = stage["params"].generator()

    # tampered shuffled ciphertext
    s0 = t.streams[0]
    pair = s0.shuffled[1]
    bad_pair = (type(pair[0])(a=pair[0].a * g, b=pair[0].b), pair[1])
    bad_stream = dataclasses.replace(s0, shuffled=(s0.shuffled[0], bad_pair) + s0.shuffled[2:])
    assert not _verify(stage, dataclasses.replace(t, streams=(bad_stream, t.streams[1])))

    # tampered micro-mix output ciphertext
    tp = t.teller_passes[1]
    rec = tp.outputs[0][0]
    bad_rec = (type(rec[0])(a=rec[0].a, b=rec[0].b * g),) + rec[1:]
    bad_outputs = ((bad_rec,) + tp.outputs[0][1:],) + tp.outputs[1:]
    bad_pass = dataclasses.replace(tp, outputs=bad_outputs)
    assert not _verify(
        stage,
        dataclasses.replace(t, teller_passes=(t.teller_passes[0], bad_pass, t.teller_passes[2])),
    )

    # omitted flip proof
    no_proofs = dataclasses.replace(t.teller_passes[0], flip_proofs=None)
    assert not _verify(
        stage,
        dataclasses.replace(t, teller_passes=(no_proofs,) + t.teller_passes[1:]),
    )

    # tampered published cell
    row = t.rows[0]
    cell = row.cells[0]
    bad_cell = ((type(cell[0][0])(a=cell[0][0].a * g, b=cell[0][0].b), cell[0][1]), cell[1])
    bad_row = dataclasses.replace(row, cells=(bad_cell,) + row.cells[1:])
    assert not _verify(stage, dataclasses.replace(t, rows=(bad_row,) + t.rows[1:]))


def test_flip_bits_uniform(stage):
    # chi-square over repeated runs, both options pooled
    counts = [0, 0]
    runs = 120
    for i in range(runs):
        _, out = _full_run(stage, seed=f"flip-{i}", with_proofs=False, n=1, lam=1)
        for b in out.sheets[0].flip_bits:
            counts[b] += 1
    total = sum(counts)
    expected = total / 2
    chi2 = sum((c - expected) ** 2 / expected for c in counts)
    assert chi2 < 10.83  # alpha = 0.001, df = 1


def test_render_sheet(stage):
    _, out = _full_run(stage, "render", with_proofs=False, n=1, lam=1)
    sheet = out.sheets[0]
    text = codegen_render(sheet)
    assert sheet.voter_id in text
    assert sheet.finalization_code in text
    assert sheet.confirmation_code in text
    for no_code, yes_code in sheet.return_codes:
        assert str(no_code) in text and str(yes_code) in text
    assert text.count("\n") >= 5 + K


def test_codegen_requires_enough_codes(stage):
    ids = [f"V{i}" for i in range(M)]  # m <= 2n
    with pytest.raises(CodegenError, match="m="):
        run_codegen(
            stage["params"],
            stage["options"],
            stage["codes"],
            stage["e_pk"],
            stage["c_pk"],
            stage["print_kp"].pk,
            stage["print_kp"].sk,
            ids,
            N_TELLERS,
            Rng("overflow"),
        )
