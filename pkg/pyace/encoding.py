from typing import List, Sequence
from pyace.errors import EncodingError
from pyace.groups import GroupParams


class Encoder:
    """
    Canonical byte writer. Scalars and elements are fixed-width big-endian,
    sequences and blobs carry a 4-byte length prefix, so every value has exactly
    one encoding and hashing or signing the bytes is unambiguous.
    """
    def __init__(self, params: GroupParams):
        self.params = params
        self.parts: List[bytes] = []

    def uint(self, value: int, width: int = 4) -> 'Encoder':
        if value < 0:
            raise EncodingError(f"cannot encode negative integer {value}")
        self.parts.append(value.to_bytes(width, "big"))
        return self

    def sint(self, value: int) -> 'Encoder':
        self.parts.append(value.to_bytes(8, "big", signed=True))
        return self

    def flag(self, value: bool) -> 'Encoder':
        return self.uint(1 if value else 0, 1)

    def scalar(self, value: int) -> 'Encoder':
        self.parts.append((value % self.params.q).to_bytes(self.params.scalar_size, "big"))
        return self

    def element(self, value: int) -> 'Encoder':
        self.parts.append(value.to_bytes(self.params.element_size, "big"))
        return self

    def scalars(self, values: Sequence[int]) -> 'Encoder':
        self.uint(len(values))
        for v in values: self.scalar(v)
        return self

    def elements(self, values: Sequence[int]) -> 'Encoder':
        self.uint(len(values))
        for v in values: self.element(v)
        return self

    def blob(self, data: bytes) -> 'Encoder':
        self.uint(len(data))
        self.parts.append(bytes(data))
        return self

    def text(self, value: str) -> 'Encoder':
        return self.blob(value.encode("utf-8"))

    def to_bytes(self) -> bytes:
        return b"".join(self.parts)


class Decoder:
    """
    Reader for Encoder output. Elements are checked for subgroup membership and
    scalars for range; any violation raises EncodingError.
    """
    def __init__(self, params: GroupParams, data: bytes):
        self.params = params
        self.data = bytes(data)
        self.offset = 0

    def _take(self, n: int) -> bytes:
        if n < 0 or self.offset + n > len(self.data):
            raise EncodingError("truncated input")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def uint(self, width: int = 4) -> int:
        return int.from_bytes(self._take(width), "big")

    def sint(self) -> int:
        return int.from_bytes(self._take(8), "big", signed=True)

    def flag(self) -> bool:
        value = self.uint(1)
        if value > 1:
            raise EncodingError(f"invalid flag byte {value}")
        return value == 1

    def scalar(self) -> int:
        value = int.from_bytes(self._take(self.params.scalar_size), "big")
        if value >= self.params.q:
            raise EncodingError("scalar out of range")
        return value

    def element(self) -> int:
        value = int.from_bytes(self._take(self.params.element_size), "big")
        if not self.params.is_element(value):
            raise EncodingError("value is not a group element")
        return value

    def _count(self) -> int:
        count = self.uint()
        if count > len(self.data):
            raise EncodingError("implausible sequence length")
        return count

    def scalars(self) -> tuple:
        return tuple(self.scalar() for _ in range(self._count()))

    def elements(self) -> tuple:
        return tuple(self.element() for _ in range(self._count()))

    def blob(self) -> bytes:
        return self._take(self.uint())

    def text(self) -> str:
        try:
            return self.blob().decode("utf-8")
        except UnicodeDecodeError as e:
            raise EncodingError(str(e))

    @property
    def done(self) -> bool:
        return self.offset == len(self.data)

    def finish(self):
        if not self.done:
            raise EncodingError(f"{len(self.data) - self.offset} trailing bytes")


def encode_all(params: GroupParams, *items) -> bytes:
    """
    Canonical bytes for a mix of ints, strings, raw bytes, nested sequences and objects
    with an encode(enc) method. Used to build signing and challenge inputs.
    """
    enc = Encoder(params)
    for item in items:
        if isinstance(item, bool):
            enc.flag(item)
        elif isinstance(item, int):
            enc.blob(item.to_bytes((item.bit_length() + 8) // 8, "big", signed=True))
        elif isinstance(item, str):
            enc.text(item)
        elif isinstance(item, (bytes, bytearray)):
            enc.blob(item)
        elif isinstance(item, (tuple, list)):
            enc.uint(len(item))
            for sub in item:
                enc.blob(encode_all(params, sub))
        elif hasattr(item, "encode"):
            item.encode(enc)
        else:
            raise EncodingError(f"cannot encode {type(item).__name__}")
    return enc.to_bytes()
