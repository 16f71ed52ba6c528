import hashlib
from dataclasses import dataclass
from pyace.encoding import Decoder, Encoder
from pyace.groups import Element, GroupParams, Scalar
from pyace.randomness import RandomSource


def hash_to_scalar(params: GroupParams, domain: bytes, transcript: bytes) -> Scalar:
    """
    Domain-separated hash onto [0, q). The shake output is 128 bits wider than q,
    so the reduction bias is negligible.
    """
    width = params.scalar_size + 16
    data = b"ace/h2s" + len(domain).to_bytes(4, "big") + domain + transcript
    return int.from_bytes(hashlib.shake_256(data).digest(width), "big") % params.q


@dataclass(frozen=True)
class Signature:
    challenge: Scalar
    response: Scalar

    def encode(self, enc: Encoder):
        enc.scalar(self.challenge).scalar(self.response)

    @classmethod
    def decode(cls, dec: Decoder) -> 'Signature':
        return cls(dec.scalar(), dec.scalar())


@dataclass(frozen=True)
class KeyPair:
    """
    Schnorr key pair over the protocol group, public key pk = g^sk.
    """
    sk: Scalar
    pk: Element

    @classmethod
    def generate(cls, params: GroupParams, rng: RandomSource) -> 'KeyPair':
        sk = rng.nonzero_scalar(params.q)
        return cls(sk, params.exp(params.g, sk))

    def __repr__(self):
        return f"KeyPair(pk={self.pk:#x})"


def _challenge(params: GroupParams, pk: Element, commitment: Element, message: bytes) -> Scalar:
    enc = Encoder(params).element(pk).element(commitment).blob(message)
    return hash_to_scalar(params, b"ace/sig", enc.to_bytes())


def sign(params: GroupParams, kp: KeyPair, message: bytes) -> Signature:
    """
    Schnorr signature with a nonce derived from the key and message, so signing is a pure function.
    """
    if not message:
        raise ValueError("refusing to sign an empty message")
    counter = 0
    while True:
        seed = Encoder(params).scalar(kp.sk).uint(counter).blob(message).to_bytes()
        nonce = hash_to_scalar(params, b"ace/sig-nonce", seed)
        if nonce: break
        counter += 1
    commitment = params.exp(params.g, nonce)
    challenge = _challenge(params, kp.pk, commitment, message)
    return Signature(challenge, (nonce + challenge * kp.sk) % params.q)


def verify_sig(params: GroupParams, pk: Element, message: bytes, sig: Signature) -> bool:
    if not isinstance(sig, Signature) or not message:
        return False
    if not params.is_element(pk) or not params.is_scalar(sig.challenge) or not params.is_scalar(sig.response):
        return False
    commitment = params.mul(params.exp(params.g, sig.response), params.exp_fixed(pk, -sig.challenge))
    return _challenge(params, pk, commitment, message) == sig.challenge
