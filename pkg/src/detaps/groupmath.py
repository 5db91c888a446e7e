"""BLS12-381 arithmetic, domain-separated hashing and canonical byte encodings.

Scalars are plain Python ints reduced modulo the group order ``Q``; group
elements are the point types of ``py_arkworks_bls12381`` (written additively).
Everything that gets hashed or put on the wire goes through :func:`encode` or
the :class:`Writer` / :class:`Reader` pair so transcripts are bit-exact.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import struct
from typing import Iterable, Sequence

from py_arkworks_bls12381 import GT, G1Point, G2Point, Scalar

from .errors import DecodeError

Q = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
FIELD_P = int(
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f6241eab"
    "fffeb153ffffb9feffffffffaaab",
    16,
)
G1_COFACTOR = 0x396C8C005555E1568C00AAAB0000AAAB

SCALAR_BYTES = 32
G1_BYTES = 48
G2_BYTES = 96
GT_BYTES = 576
DIGEST_BYTES = 32

G1_GEN = G1Point()
G2_GEN = G2Point()
G1_ZERO = G1Point.identity()

# curve security is ~128 bits regardless of the nominal lambda handed to setup
SECURITY_BITS = 128


def g1_mul(k: int, base: G1Point = G1_GEN) -> G1Point:
    return base * Scalar(k % Q)


def g2_mul(k: int, base: G2Point = G2_GEN) -> G2Point:
    return base * Scalar(k % Q)


def pair(p: G1Point, q: G2Point) -> GT:
    return GT.pairing(p, q)


def multi_pair(ps: Sequence[G1Point], qs: Sequence[G2Point]) -> GT:
    return GT.multi_pairing(list(ps), list(qs))


def g1_sum(points: Iterable[G1Point]) -> G1Point:
    acc = G1Point.identity()
    for p in points:
        acc = acc + p
    return acc


def inv(x: int) -> int:
    if x % Q == 0:
        raise ZeroDivisionError("zero has no inverse mod Q")
    return pow(x, -1, Q)


# -- hashing -----------------------------------------------------------------

def _prf(key: bytes, data: bytes) -> bytes:
    return hmac.new(key, data, hashlib.sha256).digest()


def digest(tag: bytes, data: bytes = b"") -> bytes:
    """32-byte domain-separated digest (HMAC-SHA256 keyed by the tag)."""
    if not tag:
        raise ValueError("domain tag must be non-empty")
    return _prf(tag, b"\x00" + data)


def hash_to_scalar(tag: bytes, data: bytes = b"") -> int:
    if not tag:
        raise ValueError("domain tag must be non-empty")
    wide = _prf(tag, b"\x01" + data) + _prf(tag, b"\x02" + data)
    return int.from_bytes(wide, "big") % Q


def hash_to_g1(tag: bytes, data: bytes = b"") -> G1Point:
    """Try-and-increment onto E(Fp), then clear the cofactor.

    The discrete log of the output relative to any other generator is unknown,
    which is what Pedersen and the KASE keyword hash need.
    """
    if not tag:
        raise ValueError("domain tag must be non-empty")
    for ctr in range(1024):
        block = _prf(tag, b"\x03" + ctr.to_bytes(2, "big") + data)
        block += _prf(tag, b"\x04" + ctr.to_bytes(2, "big") + data)
        x = int.from_bytes(block, "big") % FIELD_P
        raw = bytearray(x.to_bytes(G1_BYTES, "big"))
        raw[0] |= 0x80 | (0x20 if block[-1] & 1 else 0)
        try:
            p = G1Point.from_compressed_bytes_unchecked(list(raw))
        except Exception:
            continue
        p = p * Scalar(G1_COFACTOR)
        if p != G1_ZERO:
            return p
    raise RuntimeError("hash_to_g1 exhausted its counter")  # pragma: no cover


# -- canonical encodings -------------------------------------------------------

def encode(value) -> bytes:
    """Canonical fixed-width encoding of a scalar or group element."""
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        if not 0 <= value < Q:
            raise ValueError("scalar out of range")
        return value.to_bytes(SCALAR_BYTES, "big")
    if isinstance(value, G1Point) or isinstance(value, G2Point):
        return bytes(value.to_compressed_bytes())
    if isinstance(value, GT):
        # arkworks prints Fq12 as twelve canonical 48-byte limbs in hex
        return bytes.fromhex(str(value))
    raise TypeError(f"cannot encode {type(value).__name__}")


def decode_scalar(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise DecodeError("scalar must be 32 bytes")
    x = int.from_bytes(data, "big")
    if x >= Q:
        raise DecodeError("non-canonical scalar")
    return x


def decode_g1(data: bytes) -> G1Point:
    if len(data) != G1_BYTES:
        raise DecodeError("G1 element must be 48 bytes")
    try:
        p = G1Point.from_compressed_bytes(list(data))
    except Exception as exc:
        raise DecodeError(f"invalid G1 encoding: {exc}") from None
    if bytes(p.to_compressed_bytes()) != bytes(data):
        raise DecodeError("non-canonical G1 encoding")
    return p


def decode_g2(data: bytes) -> G2Point:
    if len(data) != G2_BYTES:
        raise DecodeError("G2 element must be 96 bytes")
    try:
        p = G2Point.from_compressed_bytes(list(data))
    except Exception as exc:
        raise DecodeError(f"invalid G2 encoding: {exc}") from None
    if bytes(p.to_compressed_bytes()) != bytes(data):
        raise DecodeError("non-canonical G2 encoding")
    return p


def decode(data: bytes):
    """Inverse of :func:`encode`, dispatching on length.

    GT elements are only ever hashed; their encoding is one-way here.
    """
    data = bytes(data)
    if len(data) == SCALAR_BYTES:
        return decode_scalar(data)
    if len(data) == G1_BYTES:
        return decode_g1(data)
    if len(data) == G2_BYTES:
        return decode_g2(data)
    if len(data) == GT_BYTES:
        raise DecodeError("GT elements are not decodable")
    raise DecodeError(f"no encoding has length {len(data)}")


class Writer:
    """Append-only builder for length-prefixed canonical byte strings."""

    def __init__(self):
        self._parts: list[bytes] = []

    def u8(self, x: int) -> "Writer":
        self._parts.append(struct.pack(">B", x))
        return self

    def u16(self, x: int) -> "Writer":
        self._parts.append(struct.pack(">H", x))
        return self

    def u32(self, x: int) -> "Writer":
        self._parts.append(struct.pack(">I", x))
        return self

    def u64(self, x: int) -> "Writer":
        self._parts.append(struct.pack(">Q", x))
        return self

    def scalar(self, x: int) -> "Writer":
        self._parts.append(encode(x))
        return self

    def point(self, p) -> "Writer":
        self._parts.append(encode(p))
        return self

    def raw(self, b: bytes) -> "Writer":
        self._parts.append(bytes(b))
        return self

    def blob(self, b: bytes) -> "Writer":
        return self.u32(len(b)).raw(b)

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes):
        self._data = bytes(data)
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise DecodeError("truncated input")
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def scalar(self) -> int:
        return decode_scalar(self._take(SCALAR_BYTES))

    def g1(self) -> G1Point:
        return decode_g1(self._take(G1_BYTES))

    def g2(self) -> G2Point:
        return decode_g2(self._take(G2_BYTES))

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def blob(self, limit: int = 1 << 28) -> bytes:
        n = self.u32()
        if n > limit:
            raise DecodeError("blob length exceeds limit")
        return self._take(n)

    def count(self, limit: int) -> int:
        n = self.u32()
        if n > limit:
            raise DecodeError(f"sequence length {n} exceeds limit {limit}")
        return n

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def done(self) -> None:
        if self._pos != len(self._data):
            raise DecodeError("trailing bytes")


def canonical_indices(indices: Iterable[int]) -> bytes:
    """Sorted, count-prefixed u32 encoding of a set of positive indices."""
    items = sorted(set(indices))
    w = Writer().u32(len(items))
    for i in items:
        w.u32(i)
    return w.getvalue()


def canonical_tokens(tokens: Iterable[bytes]) -> bytes:
    items = sorted(set(bytes(t) for t in tokens))
    w = Writer().u32(len(items))
    for t in items:
        w.blob(t)
    return w.getvalue()


def pad(data: bytes, size: int) -> bytes:
    """Length-prefix ``data`` and zero-fill to exactly ``size + 4`` bytes."""
    if len(data) > size:
        raise ValueError(f"payload of {len(data)} bytes exceeds pad size {size}")
    return struct.pack(">I", len(data)) + data + bytes(size - len(data))


def unpad(data: bytes) -> bytes:
    if len(data) < 4:
        raise DecodeError("padded block too short")
    n = struct.unpack(">I", data[:4])[0]
    if n > len(data) - 4 or any(data[4 + n:]):
        raise DecodeError("bad padding")
    return data[4:4 + n]


def lagrange_at_zero(xs: Sequence[int]) -> list[int]:
    """Coefficients l_j with f(0) = sum_j l_j f(x_j) for deg f < len(xs)."""
    if len(set(x % Q for x in xs)) != len(xs):
        raise ValueError("interpolation points must be distinct")
    out = []
    for j, xj in enumerate(xs):
        num, den = 1, 1
        for k, xk in enumerate(xs):
            if k == j:
                continue
            num = num * (-xk) % Q
            den = den * (xj - xk) % Q
        out.append(num * inv(den) % Q)
    return out


def poly_eval(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % Q
    return acc


class Drbg:
    """Deterministic random bit generator (HMAC-SHA256 in counter mode).

    ``Drbg(None)`` draws its key from the OS; any int or bytes seed gives a
    reproducible stream, which is how seeded runs stay byte-identical.
    """

    def __init__(self, seed: int | bytes | None = None):
        if seed is None:
            seed = secrets.token_bytes(32)
        elif isinstance(seed, int):
            seed = seed.to_bytes(8, "big", signed=False)
        self._key = _prf(b"DETAPS-DRBG", bytes(seed))
        self._ctr = 0

    def random_bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            out += _prf(self._key, self._ctr.to_bytes(8, "big"))
            self._ctr += 1
        return bytes(out[:n])

    def scalar(self) -> int:
        while True:
            x = int.from_bytes(self.random_bytes(64), "big") % Q
            if x:
                return x

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return int.from_bytes(self.random_bytes(16), "big") % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population: Sequence, k: int) -> list:
        pool = list(population)
        self.shuffle(pool)
        return pool[:k]

    def fork(self, label: bytes) -> "Drbg":
        return Drbg(self.random_bytes(32) + label)


def as_rng(rng: "Drbg | int | bytes | None") -> Drbg:
    return rng if isinstance(rng, Drbg) else Drbg(rng)
