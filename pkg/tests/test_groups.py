import pytest
from pyace.encoding import Decoder, Encoder, encode_all
from pyace.errors import ConfigError, EncodingError, TrapdoorError
from pyace.groups import GENERATOR_WINDOW, Backend, FixedBase, comb_table, derive_params, discrete_log
from pyace.randomness import RandomSource
from pyace.signatures import KeyPair, hash_to_scalar, sign, verify_sig


### Parameters

def test_tiny_params_match_hand_computation(tiny):
    assert (tiny.p, tiny.q, tiny.h, tiny.g) == (23, 11, 3, 2)
    assert tiny.g_vec == (4, 9)
    assert tiny.trapdoor[:2] == (3, 2)
    assert all(tiny.is_element(x) for x in tiny.generators)


def test_params_are_deterministic():
    assert derive_params(Backend.TINY_TEST, 2) == derive_params(Backend.TINY_TEST, 2)
    assert derive_params(Backend.TINY_TEST, 2).digest() == derive_params(Backend.TINY_TEST, 2).digest()


def test_production_params_shape():
    params = derive_params(Backend.PRODUCTION, 4)
    assert len(params.generators) == 6
    assert len(set(params.generators)) == 6
    assert params.trapdoor is None
    assert params.q.bit_length() >= 250
    assert all(params.is_element(x) for x in params.generators)


def test_domain_tag_changes_production_generators():
    a = derive_params(Backend.PRODUCTION, 2, b"ace-v1")
    b = derive_params(Backend.PRODUCTION, 2, b"ace-v2")
    assert a.h != b.h
    assert a.digest() != b.digest()


def test_too_many_choices_is_a_config_error():
    with pytest.raises(ConfigError):
        derive_params(Backend.TINY_TEST, 9)
    with pytest.raises(ConfigError):
        derive_params(Backend.TINY_TEST, 1)


def test_trapdoor_only_on_tiny(prod):
    with pytest.raises(TrapdoorError):
        prod.with_trapdoor((1, 2, 3))
    with pytest.raises(TrapdoorError):
        discrete_log(prod, prod.g)


def test_group_arithmetic(tiny):
    assert tiny.exp(3, 5) == 13
    assert tiny.mul(6, 27 % 23) == 1
    assert tiny.div(1, 4) == 6
    assert tiny.exp(tiny.h, -1) == tiny.inv(tiny.h)
    assert not tiny.is_element(5)
    assert not tiny.is_element(0)


def test_comb_tables_agree_with_powmod(prod):
    rng = RandomSource(3)
    key = KeyPair.generate(prod, rng).pk
    for _ in range(20):
        e = rng.scalar(prod.q)
        for base in prod.generators:
            assert prod.exp(base, e) == pow(base, e, prod.p)
        assert prod.exp_fixed(key, e) == pow(key, e, prod.p)
        assert prod.exp_fixed(key, -e) == pow(key, (-e) % prod.q, prod.p)
    assert prod.exp(prod.h, 0) == 1
    assert prod.exp(prod.h, prod.q) == 1


def test_comb_table_is_built_once(prod):
    table = comb_table(prod.p, prod.h, prod.q.bit_length(), GENERATOR_WINDOW)
    assert comb_table(prod.p, prod.h, prod.q.bit_length(), GENERATOR_WINDOW) is table
    assert table.power(5) == pow(prod.h, 5, prod.p)
    assert FixedBase(23, 3, 4, 2).power(7) == pow(3, 7, 23)


def test_production_group_is_a_prime_order_subgroup(prod):
    assert (prod.p - 1) % prod.q == 0
    assert prod.p.bit_length() == 2048
    assert 250 <= prod.q.bit_length() <= 256
    assert not prod.is_element(prod.p - 1)
    assert not prod.is_element(2)
    assert prod.is_element(prod.exp(prod.g, 12345))


### Signatures and hashing

def test_sign_and_verify(prod):
    kp = KeyPair.generate(prod, RandomSource(1))
    sig = sign(prod, kp, b"ballot")
    assert verify_sig(prod, kp.pk, b"ballot", sig)
    assert not verify_sig(prod, kp.pk, b"ballov", sig)
    other = KeyPair.generate(prod, RandomSource(2))
    assert not verify_sig(prod, other.pk, b"ballot", sig)


def test_signing_is_deterministic(prod):
    kp = KeyPair.generate(prod, RandomSource(1))
    assert sign(prod, kp, b"m") == sign(prod, kp, b"m")


def test_hash_to_scalar_domain_separation(prod):
    assert hash_to_scalar(prod, b"a", b"x") == hash_to_scalar(prod, b"a", b"x")
    collisions = sum(hash_to_scalar(prod, b"a", i.to_bytes(4, "big")) == hash_to_scalar(prod, b"b", i.to_bytes(4, "big"))
                     for i in range(1000))
    assert collisions == 0


def test_hash_to_scalar_range(tiny):
    assert all(0 <= hash_to_scalar(tiny, b"d", bytes([i])) < tiny.q for i in range(256))


### Encoding

def test_encoder_round_trip(prod):
    data = Encoder(prod).uint(7).sint(-1).flag(True).scalar(5).element(prod.h).text("T1").to_bytes()
    dec = Decoder(prod, data)
    assert (dec.uint(), dec.sint(), dec.flag(), dec.scalar(), dec.element(), dec.text()) == (7, -1, True, 5, prod.h, "T1")
    dec.finish()


def test_decoder_rejects_non_elements(tiny):
    data = Encoder(tiny).element(5).to_bytes()
    with pytest.raises(EncodingError):
        Decoder(tiny, data).element()


def test_decoder_rejects_trailing_bytes(tiny):
    dec = Decoder(tiny, Encoder(tiny).uint(1).to_bytes() + b"\x00")
    dec.uint()
    with pytest.raises(EncodingError):
        dec.finish()


def test_encode_all_is_unambiguous(tiny):
    assert encode_all(tiny, "ab", "c") != encode_all(tiny, "a", "bc")
    assert encode_all(tiny, (1, 2)) != encode_all(tiny, 1, 2)
    with pytest.raises(EncodingError):
        encode_all(tiny, 1.5)
