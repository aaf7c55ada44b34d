"""Attack model for the oblivious-transfer return-code scheme.

Only the attack-relevant slice of the target scheme is modeled: the OT query
carrying the (implicit) encrypted ballot, the masked-code response, and code
extraction.  The published description abridges the rest of the response; the
model includes only the listed components.

The flaw: the scheme checks a proof of knowledge of the query's combined
randomness and plaintext, but that proof says nothing about the plaintext
being *well-formed*.  A corrupted voting platform can warp one query component
by a known option-encoding power, recover the very same return codes for the
voter, and leave an undecodable ballot behind that is only thrown out after
tallying, when it can no longer be traced.

The countermeasure adds a disjunctive membership proof per query component
(this component encrypts one of the n valid option encodings), at a cost of
k*n proof branches.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canon import digest, fs_challenge
from .elgamal import KeyPair, keygen
from .encoding import MalformedPlaintextError, OptionEncoding
from .group import GroupElement, GroupParams, generate_params
from .proofs import OrProof, SchnorrProof, or_prove, or_verify
from .rng import Rng

_CODE_BYTES = 32
_QUERY_POK_LABEL = "ot-query-pok"
_WELLFORMED_LABEL = "ot-wellformed"


@dataclass(frozen=True)
class OtSetup:
    params: GroupParams
    election: KeyPair  # y = election.pk; sk stands in for the tally's threshold key
    gamma: OptionEncoding  # option encodings, n options
    codes: tuple[bytes, ...]  # one return code per option

    @property
    def n_options(self) -> int:
        return self.gamma.k


def make_setup(params: GroupParams, n_options: int, rng: Rng) -> OtSetup:
    return OtSetup(
        params=params,
        election=keygen(params, rng.child("ot-key")),
        gamma=OptionEncoding.build(params, n_options),
        codes=tuple(rng.child(f"code-{o}").randbytes(_CODE_BYTES) for o in range(1, n_options + 1)),
    )


@dataclass(frozen=True)
class OtQuery:
    a_vec: tuple[GroupElement, ...]
    b: GroupElement  # g^(r_1 + ... + r_k)
    b_components: tuple[GroupElement, ...]  # g^(r_j), consumed by the countermeasure
    pok: SchnorrProof
    wellformed: tuple[OrProof, ...] | None


@dataclass(frozen=True)
class OtResponse:
    a_pows: tuple[GroupElement, ...]  # a_j^alpha
    y_pow: GroupElement  # y^alpha
    masked: tuple[bytes, ...]  # per option: code XOR H(Gamma(option)^alpha)


def _mask(element: GroupElement) -> bytes:
    return digest("ot-code-mask", element)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _query_pok(setup: OtSetup, a_vec, b, r_sum: int, rng: Rng) -> SchnorrProof:
    """The scheme's own check: knowledge of the combined randomness (and hence
    the plaintext) of the implied ciphertext (b, prod a_j)."""
    params = setup.params
    a_prod = a_vec[0]
    for a in a_vec[1:]:
        a_prod = a_prod * a
    w = rng.scalar(params.q)
    commitment = params.generator().pow(w)
    ch = fs_challenge(params.q, _QUERY_POK_LABEL, setup.election.pk, b, a_prod, commitment)
    return SchnorrProof(commitment=commitment, challenge=ch, response=(w + ch * r_sum) % params.q)


def verify_query_pok(setup: OtSetup, query: OtQuery) -> bool:
    params = setup.params
    a_prod = query.a_vec[0]
    for a in query.a_vec[1:]:
        a_prod = a_prod * a
    ch = fs_challenge(
        params.q, _QUERY_POK_LABEL, setup.election.pk, query.b, a_prod, query.pok.commitment
    )
    if ch != query.pok.challenge:
        return False
    return params.generator().pow(query.pok.response) == query.pok.commitment * query.b.pow(ch)


def _wellformed_branches(setup: OtSetup, a_j: GroupElement, b_j: GroupElement):
    y = setup.election.pk
    g = setup.params.generator()
    return [
        [[(g, b_j), (y, a_j / setup.gamma.gamma(o))]]
        for o in range(1, setup.n_options + 1)
    ]


def prove_wellformed(
    setup: OtSetup, a_j: GroupElement, b_j: GroupElement, r_j: int, claimed_option: int, rng: Rng
) -> OrProof:
    """Disjunctive proof that a_j encrypts one of the valid option encodings.

    Produces a structurally complete proof even for a false claim; it then
    simply fails verification (used to model a cheater's best attempt).
    """
    branches = _wellformed_branches(setup, a_j, b_j)
    return or_prove(branches, [r_j], claimed_option - 1, _WELLFORMED_LABEL, b"", rng)


def ot_honest_query(setup: OtSetup, choices: tuple[int, ...], rng: Rng) -> tuple[OtQuery, list[int]]:
    """The intended query for choice vector s; returns the query and the
    private randomness r."""
    params = setup.params
    y = setup.election.pk
    r = [rng.nonzero_scalar(params.q) for _ in choices]
    a_vec = tuple(setup.gamma.gamma(s) * y.pow(r_j) for s, r_j in zip(choices, r))
    b_components = tuple(params.generator().pow(r_j) for r_j in r)
    b = params.generator().pow(sum(r) % params.q)
    pok = _query_pok(setup, a_vec, b, sum(r) % params.q, rng.child("pok"))
    wellformed = tuple(
        prove_wellformed(setup, a_vec[j], b_components[j], r[j], choices[j], rng.child(f"wf-{j}"))
        for j in range(len(choices))
    )
    return OtQuery(a_vec=a_vec, b=b, b_components=b_components, pok=pok, wellformed=wellformed), r


def ot_malicious_query(
    setup: OtSetup, choices: tuple[int, ...], rng: Rng, warp_exponent: int = 7
) -> tuple[OtQuery, list[int]]:
    """The dishonest query: the second component is warped by a known power of
    the first choice's encoding.  The implied plaintext becomes
    Gamma(s1)^(warp+1) * Gamma(s2), which no tally can decode, yet the pok
    still verifies because the platform knows the randomness."""
    params = setup.params
    y = setup.election.pk
    s1, s2 = choices
    r = [rng.nonzero_scalar(params.q) for _ in choices]
    g1 = setup.gamma.gamma(s1)
    a1 = g1 * y.pow(r[0])
    a2 = g1.pow(warp_exponent) * setup.gamma.gamma(s2) * y.pow(r[1])
    a_vec = (a1, a2)
    b_components = tuple(params.generator().pow(r_j) for r_j in r)
    b = params.generator().pow(sum(r) % params.q)
    pok = _query_pok(setup, a_vec, b, sum(r) % params.q, rng.child("pok"))
    # best effort at the membership proofs; the second one cannot verify
    wellformed = tuple(
        prove_wellformed(setup, a_vec[j], b_components[j], r[j], choices[j], rng.child(f"wf-{j}"))
        for j in range(len(choices))
    )
    return OtQuery(a_vec=a_vec, b=b, b_components=b_components, pok=pok, wellformed=wellformed), r


def ot_respond(setup: OtSetup, query: OtQuery, rng: Rng) -> OtResponse:
    """The server side: check the scheme's pok, then answer under a fresh
    exponent alpha with the masked code list."""
    if not verify_query_pok(setup, query):
        raise ValueError("query proof of knowledge failed")
    alpha = rng.nonzero_scalar(setup.params.q)
    return OtResponse(
        a_pows=tuple(a.pow(alpha) for a in query.a_vec),
        y_pow=setup.election.pk.pow(alpha),
        masked=tuple(
            _xor(setup.codes[o - 1], _mask(setup.gamma.gamma(o).pow(alpha)))
            for o in range(1, setup.n_options + 1)
        ),
    )


def ot_extract_codes(
    setup: OtSetup, response: OtResponse, r: list[int], choices: tuple[int, ...]
) -> list[bytes]:
    """Honest extraction: Gamma(s_j)^alpha = a_j^alpha / (y^alpha)^(r_j)."""
    out = []
    for j, s in enumerate(choices):
        t = response.a_pows[j] / response.y_pow.pow(r[j])
        out.append(_xor(response.masked[s - 1], _mask(t)))
    return out


def ot_malicious_extract(
    setup: OtSetup,
    response: OtResponse,
    r: list[int],
    choices: tuple[int, ...],
    warp_exponent: int = 7,
) -> list[bytes]:
    """Recover both codes from the warped query: the first component unmasks
    normally; dividing the warp power back out of the second yields
    Gamma(s2)^alpha."""
    s1, s2 = choices
    t1 = response.a_pows[0] / response.y_pow.pow(r[0])  # Gamma(s1)^alpha
    t2_warped = response.a_pows[1] / response.y_pow.pow(r[1])  # (Gamma(s1)^warp * Gamma(s2))^alpha
    t2 = t2_warped * t1.pow(warp_exponent).inv()
    return [
        _xor(response.masked[s1 - 1], _mask(t1)),
        _xor(response.masked[s2 - 1], _mask(t2)),
    ]


def implied_plaintext(setup: OtSetup, query: OtQuery) -> GroupElement:
    """Decrypt the implied ballot ciphertext (b, prod a_j) at tally time."""
    a_prod = query.a_vec[0]
    for a in query.a_vec[1:]:
        a_prod = a_prod * a
    return a_prod * query.b.pow(setup.election.sk).inv()


def tally_accepts(setup: OtSetup, query: OtQuery) -> bool:
    """The tally's post-decryption validity check: the plaintext must decompose
    into distinct option encodings."""
    try:
        setup.gamma.decode_choice(implied_plaintext(setup, query))
        return True
    except MalformedPlaintextError:
        return False


def ot_countermeasure_check(setup: OtSetup, query: OtQuery) -> tuple[bool, int]:
    """Verify the per-component membership proofs; returns (verdict, number of
    proof branches checked), the latter showing the k*n cost."""
    branches_checked = 0
    ok = query.wellformed is not None and len(query.wellformed) == len(query.a_vec)
    if ok:
        for j, proof in enumerate(query.wellformed):
            branches = _wellformed_branches(setup, query.a_vec[j], query.b_components[j])
            branches_checked += len(branches)
            if not or_verify(branches, proof, _WELLFORMED_LABEL, b""):
                ok = False
    else:
        branches_checked = len(query.a_vec) * setup.n_options
    return ok, branches_checked


def run_attack_demo(seed="ot-attack", bits: int = 64) -> dict:
    """Honest run, dishonest run, tally verdicts, countermeasure verdicts."""
    rng = Rng(seed)
    params = generate_params(bits, seed)
    setup = make_setup(params, 2, rng.child("setup"))
    choices = (1, 2)

    honest_query, honest_r = ot_honest_query(setup, choices, rng.child("honest"))
    honest_resp = ot_respond(setup, honest_query, rng.child("respond-honest"))
    honest_codes = ot_extract_codes(setup, honest_resp, honest_r, choices)

    bad_query, bad_r = ot_malicious_query(setup, choices, rng.child("malicious"))
    bad_resp = ot_respond(setup, bad_query, rng.child("respond-malicious"))  # pok passes: the flaw
    bad_codes = ot_malicious_extract(setup, bad_resp, bad_r, choices)

    cm_honest, branches = ot_countermeasure_check(setup, honest_query)
    cm_bad, _ = ot_countermeasure_check(setup, bad_query)

    return {
        "honest_codes_correct": honest_codes == [setup.codes[0], setup.codes[1]],
        "honest_tally_accepts": tally_accepts(setup, honest_query),
        "malicious_pok_passes": verify_query_pok(setup, bad_query),
        "malicious_codes_match_honest": bad_codes == honest_codes,
        "malicious_tally_accepts": tally_accepts(setup, bad_query),
        "countermeasure_accepts_honest": cm_honest,
        "countermeasure_accepts_malicious": cm_bad,
        "countermeasure_branches": branches,
        "attack_succeeds": (
            verify_query_pok(setup, bad_query)
            and bad_codes == honest_codes
            and not tally_accepts(setup, bad_query)
        ),
    }
