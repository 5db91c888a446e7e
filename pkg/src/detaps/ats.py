"""Accountable threshold signature: quorum-annotated multi-Schnorr.

Each member of a quorum S signs ``m`` bound to the canonical encoding of S;
the combined signature is the quorum plus the ordered per-signer signatures.
Tracing is therefore a read-out of the quorum, guarded by full verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import groupmath as gm
from .errors import (BadThreshold, DecodeError, InsufficientShares, NotInQuorum,
                     QuorumMismatch, ShareInvalid, WrongQuorumSize)
from .primitives import SchnorrSig, sig_sign, sig_verify

MAX_SIGNERS = 1 << 16


@dataclass(frozen=True)
class AtsPublicKey:
    keys: tuple
    t: int

    @property
    def n(self) -> int:
        return len(self.keys)

    def to_bytes(self) -> bytes:
        w = gm.Writer().u32(self.t).u32(self.n)
        for k in self.keys:
            w.point(k)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AtsPublicKey":
        r = gm.Reader(data)
        t = r.u32()
        n = r.count(MAX_SIGNERS)
        keys = tuple(r.g1() for _ in range(n))
        r.done()
        return cls(keys, t)


@dataclass(frozen=True)
class AtsSecretKey:
    index: int
    secret: int
    t: int


@dataclass(frozen=True)
class AtsShare:
    signer_index: int
    quorum: tuple
    inner: SchnorrSig


@dataclass(frozen=True)
class AtsSignature:
    quorum: tuple
    inner_sigs: tuple

    def to_bytes(self) -> bytes:
        w = gm.Writer().raw(gm.canonical_indices(self.quorum))
        for s in self.inner_sigs:
            w.raw(s.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AtsSignature":
        r = gm.Reader(data)
        k = r.count(MAX_SIGNERS)
        quorum = tuple(r.u32() for _ in range(k))
        if list(quorum) != sorted(set(quorum)):
            raise DecodeError("quorum must be sorted and distinct")
        sigs = tuple(SchnorrSig.from_bytes(r.raw(SchnorrSig.SIZE)) for _ in range(k))
        r.done()
        return cls(quorum, sigs)

    @staticmethod
    def encoded_size(t: int) -> int:
        return 4 + 4 * t + SchnorrSig.SIZE * t


def canonical_quorum(S: Iterable[int]) -> bytes:
    return gm.canonical_indices(S)


def _signing_message(m: bytes, S: Iterable[int]) -> bytes:
    return gm.Writer().raw(b"ATS").blob(m).raw(canonical_quorum(S)).getvalue()


def ats_keygen(n: int, t: int, rng=None) -> tuple[AtsPublicKey, list[AtsSecretKey]]:
    if not 1 <= t <= n:
        raise BadThreshold(f"threshold {t} outside [1, {n}]")
    rng = gm.as_rng(rng)
    secrets_ = [rng.scalar() for _ in range(n)]
    pk = AtsPublicKey(tuple(gm.g1_mul(s) for s in secrets_), t)
    return pk, [AtsSecretKey(i + 1, s, t) for i, s in enumerate(secrets_)]


def ats_sign(sk: AtsSecretKey, m: bytes, S: Iterable[int]) -> AtsShare:
    quorum = tuple(sorted(set(S)))
    if sk.index not in quorum:
        raise NotInQuorum(f"signer {sk.index} is not in the quorum")
    if len(quorum) != sk.t:
        raise WrongQuorumSize(f"quorum has {len(quorum)} members, threshold is {sk.t}")
    return AtsShare(sk.index, quorum, sig_sign(sk.secret, _signing_message(m, quorum)))


def ats_share_verify(pk: AtsPublicKey, m: bytes, share: AtsShare) -> bool:
    i = share.signer_index
    if not 1 <= i <= pk.n or i not in share.quorum:
        return False
    return sig_verify(pk.keys[i - 1], _signing_message(m, share.quorum), share.inner)


def ats_combine(pk: AtsPublicKey, m: bytes, S: Iterable[int],
                shares: Sequence[AtsShare]) -> AtsSignature:
    """Assemble a signature, verifying every share first.

    Raises QuorumMismatch if any share was made for a different quorum,
    InsufficientShares if fewer than t distinct members contributed, and
    ShareInvalid naming the first signer whose share does not verify.
    """
    quorum = tuple(sorted(set(S)))
    if len(quorum) != pk.t:
        raise WrongQuorumSize(f"quorum has {len(quorum)} members, threshold is {pk.t}")
    by_signer: dict[int, AtsShare] = {}
    for share in shares:
        if share.quorum != quorum:
            raise QuorumMismatch(f"share from signer {share.signer_index} names another quorum")
        if share.signer_index not in quorum:
            raise QuorumMismatch(f"signer {share.signer_index} is outside the quorum")
        by_signer.setdefault(share.signer_index, share)
    if len(by_signer) < pk.t:
        raise InsufficientShares(f"need {pk.t} shares, got {len(by_signer)}")
    for i in quorum:
        if not ats_share_verify(pk, m, by_signer[i]):
            raise ShareInvalid(i)
    return AtsSignature(quorum, tuple(by_signer[i].inner for i in quorum))


def ats_verify(pk: AtsPublicKey, m: bytes, sig: AtsSignature) -> bool:
    try:
        quorum = tuple(sig.quorum)
        if len(quorum) != pk.t or len(sig.inner_sigs) != pk.t:
            return False
        if list(quorum) != sorted(set(quorum)):
            return False
        if not all(1 <= i <= pk.n for i in quorum):
            return False
        msg = _signing_message(m, quorum)
        return all(sig_verify(pk.keys[i - 1], msg, s) for i, s in zip(quorum, sig.inner_sigs))
    except Exception:
        return False


def ats_trace(pk: AtsPublicKey, m: bytes, sig: AtsSignature) -> frozenset | None:
    """The signing quorum, or None when the signature is invalid."""
    if not ats_verify(pk, m, sig):
        return None
    return frozenset(sig.quorum)
