import pytest

from petvote.group import (
    GroupError,
    GroupParams,
    canonical_embed,
    decode_int,
    encode_int,
    generate_params,
    is_member,
)
from petvote.rng import Rng


def is_prime_naive(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def test_p23_injected_params_valid(p23):
    # q=11 prime, 23 = 2*11 + 1
    assert is_prime_naive(p23.p) and is_prime_naive(p23.q)
    assert p23.p == 2 * p23.q + 1


def test_generate_16_bits_is_safe_prime():
    params = generate_params(16, "seed-a")
    assert 2**15 <= params.p < 2**16
    assert is_prime_naive(params.p) and is_prime_naive(params.q)
    assert params.p == 2 * params.q + 1
    assert pow(params.g, params.q, params.p) == 1


def test_generate_is_deterministic():
    a = generate_params(64, "seed-b")
    b = generate_params(64, "seed-b")
    assert (a.p, a.q, a.g) == (b.p, b.q, b.g)
    c = generate_params(64, "seed-c")
    assert (a.p, a.q, a.g) != (c.p, c.q, c.g)


def test_generate_rejects_small_bits():
    with pytest.raises(GroupError):
        generate_params(8, "x")


@pytest.mark.parametrize(
    "p,q,g",
    [
        (25, 12, 4),  # not prime
        (23, 7, 4),  # p != 2q+1
        (23, 11, 5),  # 5 is not a quadratic residue mod 23
        (23, 11, 1),  # trivial generator
    ],
)
def test_bad_params_rejected(p, q, g):
    with pytest.raises(GroupError):
        GroupParams(p=p, q=q, g=g)


def test_pow_order(p23):
    assert p23.element(4).pow(11).value == 1


def test_mul_inverse(p23):
    e = p23.element(16)
    assert (e * e.inv()).value == 1


def test_pow_modexp_example(p23):
    # direct modular exponentiation oracle: 4^3 mod 23
    assert p23.element(4).pow(3).value == pow(4, 3, 23) == 18


def test_membership_matches_square_enumeration(p23):
    squares = {x * x % 23 for x in range(1, 23)}
    assert squares == {1, 2, 3, 4, 6, 8, 9, 12, 13, 16, 18}
    for x in range(1, 23):
        assert is_member(p23, x) == (x in squares)


def test_membership_examples(p23):
    assert is_member(p23, 2) is True
    assert is_member(p23, 5) is False
    assert is_member(p23, 1) is True
    with pytest.raises(GroupError):
        is_member(p23, 0)
    with pytest.raises(GroupError):
        is_member(p23, 23)


def test_element_construction_validates(p23):
    with pytest.raises(GroupError):
        p23.element(5)
    with pytest.raises(GroupError):
        p23.element(0)
    with pytest.raises(GroupError):
        p23.element(23)


def test_mixing_parameter_sets_rejected(p23):
    other = generate_params(16, "other")
    with pytest.raises(GroupError):
        p23.element(2) * other.element(other.g)


def test_closure_under_operations(params64):
    rng = Rng("closure")
    for _ in range(25):
        a = params64.random_element(rng)
        b = params64.random_element(rng)
        x = rng.scalar(params64.q)
        for result in (a * b, a.pow(x), a.inv(), a / b):
            assert is_member(params64, result.value)


def test_generator_order(params64):
    assert params64.generator().pow(params64.q).value == 1


def test_exponent_composition(params64):
    rng = Rng("exp-comp")
    g = params64.generator()
    for _ in range(25):
        a = rng.scalar(params64.q)
        b = rng.scalar(params64.q)
        assert g.pow(a).pow(b) == g.pow(a * b % params64.q)


def test_int_encoding_roundtrip(params64):
    for x in [0, 1, 2, 17, 1000, params64.q - 2]:
        e = encode_int(params64, x)
        assert is_member(params64, e.value)
        assert decode_int(params64, e) == x


def test_int_encoding_bounds(p23):
    with pytest.raises(GroupError):
        encode_int(p23, p23.q - 1)
    with pytest.raises(GroupError):
        encode_int(p23, -1)


def test_canonical_embed_picks_residue(p23):
    for v in range(1, 23):
        e = canonical_embed(p23, v)
        assert e.value in (v, 23 - v)
        assert is_member(p23, e.value)


def test_params_text_roundtrip(params64):
    again = GroupParams.from_text(params64.to_text())
    assert again == params64


def test_element_equality_and_hash(p23):
    assert p23.element(2) == p23.element(2)
    assert p23.element(2) != p23.element(3)
    assert len({p23.element(2), p23.element(2), p23.element(3)}) == 2
