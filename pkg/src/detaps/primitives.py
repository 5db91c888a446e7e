"""Pedersen commitments, Schnorr signatures and hybrid ElGamal/AES-GCM encryption."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from py_arkworks_bls12381 import G1Point

from . import groupmath as gm
from .errors import AuthFailure, DecodeError

_ZERO_NONCE = bytes(12)
GCM_TAG = 16


class Scheme(enum.Enum):
    SIG = "SIG"
    PKE = "PKE"


@dataclass(frozen=True)
class KeyPair:
    scheme: Scheme
    public: G1Point
    secret: int


def keygen(scheme: Scheme, seed: bytes | None = None, rng=None) -> KeyPair:
    """Deterministic when ``seed`` is given; otherwise draws from ``rng``."""
    if seed:
        sk = gm.hash_to_scalar(b"KEYGEN-" + scheme.value.encode(), seed) or 1
    else:
        sk = gm.as_rng(rng).scalar()
    return KeyPair(scheme, gm.g1_mul(sk), sk)


# -- COM ---------------------------------------------------------------------

PEDERSEN_H = gm.hash_to_g1(b"PEDERSEN-H")


@dataclass(frozen=True)
class Commitment:
    point: G1Point

    def to_bytes(self) -> bytes:
        return gm.encode(self.point)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Commitment":
        return cls(gm.decode_g1(data))


def message_scalar(x: bytes) -> int:
    return gm.hash_to_scalar(b"COM-MSG", x)


def com_commit(x: bytes, r: int) -> Commitment:
    return Commitment(gm.g1_mul(message_scalar(x)) + gm.g1_mul(r, PEDERSEN_H))


def com_verify(x: bytes, r: int, com: Commitment) -> bool:
    try:
        return com_commit(x, r).point == com.point
    except Exception:
        return False


# -- SIG ---------------------------------------------------------------------

@dataclass(frozen=True)
class SchnorrSig:
    c: int
    z: int

    SIZE = 2 * gm.SCALAR_BYTES

    def to_bytes(self) -> bytes:
        return gm.encode(self.c) + gm.encode(self.z)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SchnorrSig":
        if len(data) != cls.SIZE:
            raise DecodeError("Schnorr signature must be 64 bytes")
        return cls(gm.decode_scalar(data[:32]), gm.decode_scalar(data[32:]))


def _sig_challenge(pk: G1Point, R: G1Point, msg: bytes) -> int:
    return gm.hash_to_scalar(b"SCHNORR", gm.encode(pk) + gm.encode(R) + msg)


def sig_sign(sk: int, msg: bytes) -> SchnorrSig:
    # deterministic nonce, so signing needs no RNG and replays are exact
    k = gm.hash_to_scalar(b"SCHNORR-NONCE", gm.encode(sk % gm.Q) + msg) or 1
    R = gm.g1_mul(k)
    c = _sig_challenge(gm.g1_mul(sk), R, msg)
    return SchnorrSig(c, (k + c * sk) % gm.Q)


def sig_verify(pk: G1Point, msg: bytes, sig) -> bool:
    try:
        if isinstance(sig, (bytes, bytearray)):
            sig = SchnorrSig.from_bytes(bytes(sig))
        R = gm.g1_mul(sig.z) + gm.g1_mul(gm.Q - sig.c, pk)
        return _sig_challenge(pk, R, msg) == sig.c
    except Exception:
        return False


# -- PKE ---------------------------------------------------------------------

@dataclass(frozen=True)
class HybridCiphertext:
    ephemeral: G1Point
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return gm.Writer().point(self.ephemeral).blob(self.body).raw(self.tag).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "HybridCiphertext":
        r = gm.Reader(data)
        ct = cls(r.g1(), r.blob(), r.raw(GCM_TAG))
        r.done()
        return ct

    @property
    def overhead(self) -> int:
        return len(self.to_bytes()) - len(self.body)


def _kem_key(ephemeral: G1Point, shared: G1Point, label: bytes) -> bytes:
    return gm.digest(b"PKE-KDF" + label, gm.encode(ephemeral) + gm.encode(shared))


def pke_encrypt(pk: G1Point, plaintext: bytes, rng=None, aad: bytes = b"") -> HybridCiphertext:
    r = gm.as_rng(rng).scalar()
    eph = gm.g1_mul(r)
    key = _kem_key(eph, gm.g1_mul(r, pk), b"")
    sealed = AESGCM(key).encrypt(_ZERO_NONCE, bytes(plaintext), aad)
    return HybridCiphertext(eph, sealed[:-GCM_TAG], sealed[-GCM_TAG:])


def pke_decrypt(sk: int, ct: HybridCiphertext, aad: bytes = b"") -> bytes:
    key = _kem_key(ct.ephemeral, gm.g1_mul(sk, ct.ephemeral), b"")
    try:
        return AESGCM(key).decrypt(_ZERO_NONCE, ct.body + ct.tag, aad)
    except InvalidTag:
        raise AuthFailure("ciphertext failed authentication") from None


def aead_seal(key: bytes, plaintext: bytes, aad: bytes = b"") -> bytes:
    """AES-256-GCM under a single-use key (fixed nonce is safe for that)."""
    return AESGCM(key).encrypt(_ZERO_NONCE, plaintext, aad)


def aead_open(key: bytes, sealed: bytes, aad: bytes = b"") -> bytes:
    try:
        return AESGCM(key).decrypt(_ZERO_NONCE, sealed, aad)
    except InvalidTag:
        raise AuthFailure("ciphertext failed authentication") from None
