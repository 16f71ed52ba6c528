import hashlib
import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional, Tuple
import gmpy2
from pyace import params as defaults
from pyace.errors import ConfigError, TrapdoorError

logger = logging.getLogger(__name__)

Scalar = int
Element = int


class Backend(Enum):
    PRODUCTION = "production"
    TINY_TEST = "tiny_test"


# RFC 5114 2048-bit MODP group with a 256-bit prime-order subgroup: q divides p - 1
# and the subgroup is the image of x -> x^((p - 1) / q).
MODP_2048_P = int("""
    87A8E61D B4B6663C FFBBD19C 65195999 8CEEF608 660DD0F2
    5D2CEED4 435E3B00 E00DF8F1 D61957D4 FAF7DF45 61B2AA30
    16C3D911 34096FAA 3BF4296D 830E9A7C 209E0C64 97517ABD
    5A8A9D30 6BCF67ED 91F9E672 5B4758C0 22E0B1EF 4275BF7B
    6C5BFC11 D45F9088 B941F54E B1E59BB8 BC39A0BF 12307F5C
    4FDB70C5 81B23F76 B63ACAE1 CAA6B790 2D525267 35488A0E
    F13C6D9A 51BFA4AB 3AD83477 96524D8E F6A167B5 A41825D9
    67E144E5 14056425 1CCACB83 E6B486F6 B3CA3F79 71506026
    C0B857F6 89962856 DED4010A BD0BE621 C3A3960A 54E710C3
    75F26375 D7014103 A4B54330 C198AF12 6116D227 6E11715F
    693877FA D7EF09CA DB094AE9 1E1A1597
    """.replace(" ", "").replace("\n", ""), 16)
MODP_2048_Q = int("""
    8CF83642 A709A097 B4479976 40129DA2 99B1A47D 1EB3750B
    A308B0FE 64F5FBD3
    """.replace(" ", "").replace("\n", ""), 16)

# order-11 subgroup of the integers mod 23, generated by 3
TINY_P = 23
TINY_Q = 11
TINY_H = 3
TINY_G = 2
TINY_G_POOL = (4, 9, 6, 8, 12, 13, 16, 18)

# comb windows: wide for the few generators, narrow for the many signing keys
GENERATOR_WINDOW = 6
KEY_WINDOW = 4
# below this order a plain powmod is as fast as any table
COMB_MIN_BITS = 64


class FixedBase:
    """
    Comb table of base^(d * 2^(w*i)) for every w-bit digit d of window i. A power
    then costs one modular multiplication per window and no squarings.
    """
    def __init__(self, p: int, base: Element, bits: int, window: int):
        self.p = gmpy2.mpz(p)
        self.window = window
        self.mask = (1 << window) - 1
        self.rows = []
        step = gmpy2.mpz(base)
        for _ in range((bits + window - 1) // window):
            row = [gmpy2.mpz(1)]
            for _ in range(self.mask):
                row.append(row[-1] * step % self.p)
            self.rows.append(row)
            step = row[-1] * step % self.p

    def power(self, exponent: int) -> Element:
        result = gmpy2.mpz(1)
        for row in self.rows:
            if not exponent:
                break
            digit = exponent & self.mask
            if digit:
                result = result * row[digit] % self.p
            exponent >>= self.window
        return int(result)


@lru_cache(maxsize=512)
def comb_table(p: int, base: Element, bits: int, window: int) -> FixedBase:
    logger.debug("comb table for base %#x, %d-bit exponents, window %d", base % 2**32, bits, window)
    return FixedBase(p, base, bits, window)


@lru_cache(maxsize=1 << 16)
def _in_subgroup(p: int, q: int, value: int) -> bool:
    return gmpy2.powmod(value, q, p) == 1


@dataclass(frozen=True)
class GroupParams:
    """
    Public parameters (G, q, h, g_1..g_n, g) of the commitment scheme.
    Elements are integers mod p in the order-q subgroup, scalars are integers in [0, q).

    The trapdoor holds the discrete logs log_h(g_k) followed by log_h(g) and only
    exists for the tiny_test backend.
    """
    backend: Backend
    p: int
    q: int
    h: Element
    g_vec: Tuple[Element, ...]
    g: Element
    domain_tag: bytes
    trapdoor: Optional[Tuple[Scalar, ...]] = None

    def __post_init__(self):
        if self.trapdoor is not None and self.backend is not Backend.TINY_TEST:
            raise TrapdoorError("trapdoor is only available on the tiny_test backend")

    @property
    def n_choices(self) -> int:
        return len(self.g_vec)

    @property
    def generators(self) -> Tuple[Element, ...]:
        return (self.h,) + self.g_vec + (self.g,)

    @property
    def element_size(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_size(self) -> int:
        return (self.q.bit_length() + 7) // 8

    @property
    def identity(self) -> Element:
        return 1

    def exp(self, base: Element, exponent: int) -> Element:
        exponent %= self.q
        if self.q.bit_length() >= COMB_MIN_BITS and base in self.generators:
            return comb_table(self.p, base, self.q.bit_length(), GENERATOR_WINDOW).power(exponent)
        return int(gmpy2.powmod(base, exponent, self.p))

    def exp_fixed(self, base: Element, exponent: int) -> Element:
        """
        Power of a long-lived base such as a public key, through a cached comb table.
        """
        exponent %= self.q
        if self.q.bit_length() < COMB_MIN_BITS:
            return int(gmpy2.powmod(base, exponent, self.p))
        return comb_table(self.p, base, self.q.bit_length(), KEY_WINDOW).power(exponent)

    def mul(self, *elements: Element) -> Element:
        result = 1
        for e in elements:
            result = (result * e) % self.p
        return result

    def prod(self, elements: Iterable[Element]) -> Element:
        return self.mul(*elements)

    def inv(self, element: Element) -> Element:
        return int(gmpy2.invert(element, self.p))

    def div(self, a: Element, b: Element) -> Element:
        return self.mul(a, self.inv(b))

    def is_element(self, value) -> bool:
        if not isinstance(value, int) or not 0 < value < self.p:
            return False
        return _in_subgroup(self.p, self.q, value)

    def is_scalar(self, value) -> bool:
        return isinstance(value, int) and 0 <= value < self.q

    def digest(self) -> bytes:
        """
        Hash binding every public parameter, used in Fiat-Shamir challenges and transcript headers.
        """
        h = hashlib.sha256(b"ace/params")
        for part in (self.backend.value.encode(), self.domain_tag):
            h.update(len(part).to_bytes(4, "big") + part)
        for value in (self.p, self.q) + self.generators:
            data = value.to_bytes(self.element_size, "big")
            h.update(len(data).to_bytes(4, "big") + data)
        return h.digest()

    def with_trapdoor(self, trapdoor: Tuple[Scalar, ...]) -> 'GroupParams':
        return replace(self, trapdoor=tuple(t % self.q for t in trapdoor))


def discrete_log(params: GroupParams, element: Element) -> Scalar:
    """
    Exhaustive discrete log base h, only practical for the tiny group.
    """
    if params.q > 2**20:
        raise TrapdoorError("exhaustive discrete log is only possible in the tiny group")
    value = 1
    for exponent in range(params.q):
        if value == element:
            return exponent
        value = (value * params.h) % params.p
    raise ValueError(f"{element} is not in the subgroup generated by h")


def hash_to_group(p: int, q: int, domain_tag: bytes, label: bytes, taken=()) -> Element:
    """
    Domain-separated hash mod p raised to the cofactor (p - 1) / q. Every result other
    than 1 has order q, and nobody learns its discrete log.
    """
    cofactor = (p - 1) // q
    width = (p.bit_length() + 7) // 8 + 16
    counter = 0
    while True:
        seed = b"ace/hash-to-group" + len(domain_tag).to_bytes(2, "big") + domain_tag + label + counter.to_bytes(4, "big")
        x = int.from_bytes(hashlib.shake_256(seed).digest(width), "big") % p
        element = int(gmpy2.powmod(x, cofactor, p))
        if element not in (0, 1) and element not in taken:
            return element
        counter += 1


def _production_params(n_choices: int, domain_tag: bytes) -> GroupParams:
    p, q = MODP_2048_P, MODP_2048_Q
    taken = []
    for label in [b"h"] + [b"g%d" % k for k in range(1, n_choices + 1)] + [b"g"]:
        taken.append(hash_to_group(p, q, domain_tag, label, taken))
    return GroupParams(Backend.PRODUCTION, p, q, taken[0], tuple(taken[1:-1]), taken[-1], domain_tag)


def _tiny_test_params(n_choices: int, domain_tag: bytes) -> GroupParams:
    params = GroupParams(Backend.TINY_TEST, TINY_P, TINY_Q, TINY_H, TINY_G_POOL[:n_choices], TINY_G, domain_tag)
    trapdoor = tuple(discrete_log(params, g) for g in params.g_vec + (params.g,))
    return params.with_trapdoor(trapdoor)


@lru_cache(maxsize=None)
def derive_params(backend: Backend, n_choices: int, domain_tag: bytes = defaults.domain_tag) -> GroupParams:
    """
    Deterministic public parameters for a backend and ballot width.
    """
    backend = Backend(backend)
    limit = defaults.max_choices[backend.value]
    if not 2 <= n_choices <= limit:
        raise ConfigError(f"{backend.value} backend supports 2..{limit} choices, got {n_choices}")

    if backend is Backend.TINY_TEST:
        params = _tiny_test_params(n_choices, domain_tag)
    else:
        params = _production_params(n_choices, domain_tag)

    generators = params.generators
    assert len(set(generators)) == len(generators)
    assert all(params.is_element(g) and g != 1 for g in generators)
    logger.debug("derived %s params for %d choices", backend.value, n_choices)
    return params
