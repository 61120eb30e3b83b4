"""Arithmetic in the BN254 scalar field.

Values are plain Python ints held in ``[0, P)``. The :class:`FieldElement`
wrapper exists for callers who want operator syntax; hot paths work on ints
directly through the module-level functions.
"""
from __future__ import annotations

from .errors import NonCanonicalEncoding, ZeroInverse

P = 21888242871839275222246405745257275088548364400416034343698204186575808495617
"""Order of the BN254 scalar field."""

BYTES = 32
BITS = P.bit_length()  # 254


def add(a: int, b: int) -> int:
    return (a + b) % P


def sub(a: int, b: int) -> int:
    return (a - b) % P


def mul(a: int, b: int) -> int:
    return (a * b) % P


def neg(a: int) -> int:
    return (-a) % P


def inv(a: int) -> int:
    """Multiplicative inverse; raises ZeroInverse for 0."""
    a %= P
    if a == 0:
        raise ZeroInverse("0 has no inverse in the field")
    return pow(a, P - 2, P)


def fpow(a: int, e: int) -> int:
    """Square-and-multiply exponentiation, ``a**e mod P`` for ``e >= 0``."""
    if e < 0:
        raise ValueError("exponent must be non-negative")
    result = 1
    base = a % P
    while e:
        if e & 1:
            result = result * base % P
        base = base * base % P
        e >>= 1
    return result


def arith(a: int, b: int, op: str) -> int:
    """Dispatch helper: op is one of add, sub, mul, neg (neg ignores b)."""
    if op == "add":
        return add(a, b)
    if op == "sub":
        return sub(a, b)
    if op == "mul":
        return mul(a, b)
    if op == "neg":
        return neg(a)
    raise ValueError(f"unknown field op {op!r}")


def canonical(x: int) -> int:
    return x % P


def encode(x: int) -> bytes:
    """Fixed 32-byte big-endian encoding."""
    if not 0 <= x < P:
        raise NonCanonicalEncoding(f"value out of range: {x}")
    return x.to_bytes(BYTES, "big")


def decode(data: bytes) -> int:
    if len(data) != BYTES:
        raise NonCanonicalEncoding(f"expected {BYTES} bytes, got {len(data)}")
    x = int.from_bytes(data, "big")
    if x >= P:
        raise NonCanonicalEncoding("encoded integer is not below the modulus")
    return x


def to_hex(x: int) -> str:
    return "0x" + encode(x).hex()


def from_hex(text: str) -> int:
    if not isinstance(text, str) or not text.startswith("0x") or len(text) != 2 + 2 * BYTES:
        raise NonCanonicalEncoding(f"malformed field element text: {text!r}")
    try:
        raw = bytes.fromhex(text[2:])
    except ValueError as exc:
        raise NonCanonicalEncoding(str(exc)) from None
    if text[2:] != text[2:].lower():
        raise NonCanonicalEncoding("hex digits must be lowercase")
    return decode(raw)


class FieldElement:
    """Immutable field element with operator overloads."""

    __slots__ = ("value",)

    def __init__(self, value: int):
        object.__setattr__(self, "value", int(value) % P)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @staticmethod
    def _v(other) -> int:
        return other.value if isinstance(other, FieldElement) else int(other) % P

    def __add__(self, other):
        return FieldElement(self.value + self._v(other))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._v(other))

    def __rsub__(self, other):
        return FieldElement(self._v(other) - self.value)

    def __mul__(self, other):
        return FieldElement(self.value * self._v(other))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value)

    def __truediv__(self, other):
        return FieldElement(self.value * inv(self._v(other)))

    def __pow__(self, e: int):
        return FieldElement(fpow(self.value, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other % P
        return NotImplemented

    def __hash__(self):
        return hash(("fe", self.value))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __repr__(self):
        return f"FieldElement({to_hex(self.value)})"

    def to_bytes(self) -> bytes:
        return encode(self.value)

    @classmethod
    def from_bytes(cls, data: bytes) -> "FieldElement":
        return cls(decode(data))

    def hex(self) -> str:
        return to_hex(self.value)

    @classmethod
    def from_hex(cls, text: str) -> "FieldElement":
        return cls(from_hex(text))
