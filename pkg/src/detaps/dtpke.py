"""Dynamic threshold public-key encryption.

Hybrid construction: a fresh secret ``s`` is Shamir-shared with a threshold
t' chosen at encryption time among an ad-hoc notary set N. Every notary slot
(real or dummy) carries an ElGamal ephemeral plus a sealed 50-byte payload;
real payloads hold the notary's share and t', dummies are random bytes.
Feldman commitments (padded to ``t_max``) make opened shares checkable, and a
Chaum-Pedersen proof shows each partial decryption used the right key.

Each slot also carries a 16-byte membership tag and the ciphertext a binding
MAC, both keyed by a value only the ck holder can recompute. Validation is
therefore keyed too: a public check over (N, t') would let anyone enumerate
the small space of notary sets and recover N and t' from the ciphertext.

The body key needs both ``s`` and the combine secret ``ck``, so neither a
quorum of notaries nor the ck holder can decrypt alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from py_arkworks_bls12381 import G1Point

from . import groupmath as gm
from .errors import (AuthFailure, BadBound, DecodeError, InsufficientShares,
                     ThresholdTooLarge, UnknownPid)
from .primitives import aead_open, aead_seal

PID_BYTES = 16
SEALED_BYTES = gm.SCALAR_BYTES + 2 + 16
TAG_BYTES = 16
HEADER_BYTES = gm.G1_BYTES + SEALED_BYTES + TAG_BYTES


@dataclass(frozen=True)
class NotaryRecord:
    pid: bytes
    slot: int
    upk: G1Point
    uvk: G1Point


@dataclass(frozen=True)
class NotaryKeys:
    pid: bytes
    slot: int
    generation: int
    usk: int
    upk: G1Point
    uvk: G1Point

    @property
    def record(self) -> NotaryRecord:
        return NotaryRecord(self.pid, self.slot, self.upk, self.uvk)


def _registry_bytes(records: Iterable[NotaryRecord]) -> bytes:
    recs = sorted(records, key=lambda r: r.slot)
    w = gm.Writer().u32(len(recs))
    for r in recs:
        w.raw(r.pid).u16(r.slot).point(r.upk).point(r.uvk)
    return w.getvalue()


@dataclass(frozen=True)
class EncryptionKey:
    combine_pub: G1Point
    n3: int
    t_max: int
    notaries: Mapping[bytes, NotaryRecord] = field(hash=False)

    def to_bytes(self) -> bytes:
        return (gm.Writer().point(self.combine_pub).u32(self.n3).u32(self.t_max)
                .raw(_registry_bytes(self.notaries.values())).getvalue())

    def digest(self) -> bytes:
        return gm.digest(b"DTPKE-EK", self.to_bytes())


@dataclass(frozen=True)
class DecryptionParams:
    n3: int
    slots: Mapping[bytes, int] = field(hash=False)


@dataclass(frozen=True)
class VerificationKey:
    t_max: int
    notaries: Mapping[bytes, NotaryRecord] = field(hash=False)


@dataclass(frozen=True)
class CombineKey:
    secret: int
    vk: VerificationKey


@dataclass
class DtpkeAuthority:
    mk: int
    ck_secret: int
    n3: int
    t_max: int
    slots: dict = field(default_factory=dict)        # slot -> NotaryRecord
    generations: dict = field(default_factory=dict)  # slot -> join count

    def _records(self) -> dict:
        return {r.pid: r for r in self.slots.values()}

    @property
    def ek(self) -> EncryptionKey:
        return EncryptionKey(gm.g1_mul(self.ck_secret), self.n3, self.t_max, self._records())

    @property
    def dk(self) -> DecryptionParams:
        return DecryptionParams(self.n3, {r.pid: r.slot for r in self.slots.values()})

    @property
    def vk(self) -> VerificationKey:
        return VerificationKey(self.t_max, self._records())

    @property
    def ck(self) -> CombineKey:
        return CombineKey(self.ck_secret, self.vk)


@dataclass(frozen=True)
class SlotHeader:
    ephemeral: G1Point
    sealed: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return gm.encode(self.ephemeral) + self.sealed + self.tag

    @classmethod
    def read(cls, r: "gm.Reader") -> "SlotHeader":
        return cls(r.g1(), r.raw(SEALED_BYTES), r.raw(TAG_BYTES))


@dataclass(frozen=True)
class DtpkeCiphertext:
    headers: tuple
    commitments: tuple
    ck_header: G1Point
    binding: bytes
    body: bytes

    def core_bytes(self) -> bytes:
        w = gm.Writer().u32(len(self.headers))
        for h in self.headers:
            w.raw(h.to_bytes())
        w.u32(len(self.commitments))
        for c in self.commitments:
            w.point(c)
        return w.point(self.ck_header).blob(self.body).getvalue()

    def to_bytes(self) -> bytes:
        return self.core_bytes() + self.binding

    def digest(self) -> bytes:
        return gm.digest(b"DTPKE-CT", self.to_bytes())

    def kem_points(self) -> tuple:
        return tuple(h.ephemeral for h in self.headers) + (self.ck_header,)

    @classmethod
    def from_bytes(cls, data: bytes, max_slots: int = 4096) -> "DtpkeCiphertext":
        r = gm.Reader(data)
        headers = tuple(SlotHeader.read(r) for _ in range(r.count(max_slots)))
        commitments = tuple(r.g1() for _ in range(r.count(max_slots)))
        ck_header = r.g1()
        body = r.blob()
        binding = r.raw(gm.DIGEST_BYTES)
        r.done()
        return cls(headers, commitments, ck_header, binding, body)


@dataclass(frozen=True)
class DecryptionShare:
    pid: bytes
    share_point: G1Point
    proof_c: int
    proof_z: int

    SIZE = PID_BYTES + gm.G1_BYTES + 2 * gm.SCALAR_BYTES

    def to_bytes(self) -> bytes:
        return (gm.Writer().raw(self.pid).point(self.share_point)
                .scalar(self.proof_c).scalar(self.proof_z).getvalue())

    @classmethod
    def from_bytes(cls, data: bytes) -> "DecryptionShare":
        r = gm.Reader(data)
        out = cls(r.raw(PID_BYTES), r.g1(), r.scalar(), r.scalar())
        r.done()
        return out


@dataclass(frozen=True)
class EncryptionCoins:
    """Discrete logs of every KEM point, kept by the encryptor for proofs."""
    slot_exponents: tuple
    ck_exponent: int


# -- setup / join ------------------------------------------------------------

def dtpke_setup(n3: int, t_max: int, rng=None) -> DtpkeAuthority:
    if n3 < 1 or not 1 <= t_max <= n3:
        raise BadBound(f"need 1 <= t_max <= n3, got t_max={t_max}, n3={n3}")
    rng = gm.as_rng(rng)
    return DtpkeAuthority(mk=rng.scalar(), ck_secret=rng.scalar(), n3=n3, t_max=t_max)


def uvk_base(pid: bytes) -> G1Point:
    return gm.hash_to_g1(b"DTPKE-UVK", pid)


def dtpke_join(authority: DtpkeAuthority, ident: int) -> NotaryKeys:
    """Register notary ``ident`` (its slot, 1..n3) under a fresh pseudo-identity.

    Joining the same slot again rotates the pid; the previous one is retired.
    """
    if not 1 <= ident <= authority.n3:
        raise BadBound(f"notary id {ident} outside [1, {authority.n3}]")
    gen = authority.generations.get(ident, 0)
    authority.generations[ident] = gen + 1
    mk = gm.encode(authority.mk)
    pid = gm.digest(b"DTPKE-PID", mk + ident.to_bytes(4, "big") + gen.to_bytes(4, "big"))[:PID_BYTES]
    usk = gm.hash_to_scalar(b"DTPKE-USK", mk + pid) or 1
    keys = NotaryKeys(pid, ident, gen, usk, gm.g1_mul(usk), gm.g1_mul(usk, uvk_base(pid)))
    authority.slots[ident] = keys.record
    return keys


# -- encryption --------------------------------------------------------------

def _slot_key(ephemeral: G1Point, shared: G1Point, slot: int) -> bytes:
    return gm.digest(b"DTPKE-SLOT", gm.encode(ephemeral) + gm.encode(shared) + slot.to_bytes(2, "big"))


def _dem_key(s: int, ck_shared: G1Point) -> bytes:
    return gm.digest(b"DTPKE-DEM", gm.encode(s) + gm.encode(ck_shared))


def _body_aad(headers, commitments, ck_header) -> bytes:
    w = gm.Writer()
    for h in headers:
        w.raw(h.to_bytes())
    for c in commitments:
        w.point(c)
    return gm.digest(b"DTPKE-AAD", w.point(ck_header).getvalue())


def _bind_key(ck_shared: G1Point) -> bytes:
    return gm.digest(b"DTPKE-BINDKEY", gm.encode(ck_shared))


def _member_tag(bind_key: bytes, slot: int, pid: bytes, t_prime: int) -> bytes:
    data = bind_key + slot.to_bytes(2, "big") + pid + t_prime.to_bytes(2, "big")
    return gm.digest(b"DTPKE-MEMBER", data)[:TAG_BYTES]


def _binding(bind_key: bytes, ek: EncryptionKey, t_prime: int, core: bytes) -> bytes:
    data = bind_key + ek.digest() + t_prime.to_bytes(2, "big") + core
    return gm.digest(b"DTPKE-BIND", data)


def _check_set(ek: EncryptionKey, N: Sequence[bytes], t_prime: int) -> None:
    for pid in N:
        if pid not in ek.notaries:
            raise UnknownPid(pid.hex())
    if t_prime < 1:
        raise BadBound("t' must be at least 1")
    if t_prime > len(N):
        raise ThresholdTooLarge(f"t'={t_prime} exceeds |N|={len(N)}")
    if t_prime > ek.t_max:
        raise ThresholdTooLarge(f"t'={t_prime} exceeds t_max={ek.t_max}")


def dtpke_encrypt_with_coins(ek: EncryptionKey, N: Iterable[bytes], t_prime: int,
                             m: bytes, rng=None) -> tuple[DtpkeCiphertext, EncryptionCoins]:
    rng = gm.as_rng(rng)
    N = sorted(set(bytes(p) for p in N))
    _check_set(ek, N, t_prime)
    members = {ek.notaries[pid].slot: ek.notaries[pid] for pid in N}

    coeffs = [rng.scalar() for _ in range(t_prime)]
    commitments = [gm.g1_mul(a) for a in coeffs]
    commitments += [gm.g1_mul(rng.scalar()) for _ in range(ek.t_max - t_prime)]

    r = rng.scalar()
    ck_header = gm.g1_mul(r)
    ck_shared = gm.g1_mul(r, ek.combine_pub)
    bind_key = _bind_key(ck_shared)

    headers, exps = [], []
    for slot in range(1, ek.n3 + 1):
        rho = rng.scalar()
        R = gm.g1_mul(rho)
        if slot in members:
            key = _slot_key(R, gm.g1_mul(rho, members[slot].upk), slot)
            payload = gm.encode(gm.poly_eval(coeffs, slot)) + t_prime.to_bytes(2, "big")
            sealed = aead_seal(key, payload, slot.to_bytes(2, "big"))
            tag = _member_tag(bind_key, slot, members[slot].pid, t_prime)
        else:
            sealed = rng.random_bytes(SEALED_BYTES)
            tag = rng.random_bytes(TAG_BYTES)
        headers.append(SlotHeader(R, sealed, tag))
        exps.append(rho)

    key = _dem_key(coeffs[0], ck_shared)
    body = aead_seal(key, bytes(m), _body_aad(headers, commitments, ck_header))
    ct = DtpkeCiphertext(tuple(headers), tuple(commitments), ck_header, b"", body)
    ct = DtpkeCiphertext(ct.headers, ct.commitments, ck_header,
                         _binding(bind_key, ek, t_prime, ct.core_bytes()), body)
    return ct, EncryptionCoins(tuple(exps), r)


def dtpke_encrypt(ek: EncryptionKey, N: Iterable[bytes], t_prime: int, m: bytes,
                  rng=None) -> DtpkeCiphertext:
    return dtpke_encrypt_with_coins(ek, N, t_prime, m, rng)[0]


def dtpke_validate(ek: EncryptionKey, N: Iterable[bytes], t_prime: int,
                   c: DtpkeCiphertext, ck: CombineKey) -> bool:
    """Every pid in N holds a real slot for threshold t' and nothing was altered.

    N may be any subset of the encryption set (the tracer only sees the
    notaries that responded); a pid outside the set fails its slot tag.
    """
    try:
        N = sorted(set(bytes(p) for p in N))
        for pid in N:
            if pid not in ek.notaries:
                return False
        if not 1 <= t_prime <= ek.t_max:
            return False
        if len(c.headers) != ek.n3 or len(c.commitments) != ek.t_max:
            return False
        if any(len(h.sealed) != SEALED_BYTES or len(h.tag) != TAG_BYTES for h in c.headers):
            return False
        bind_key = _bind_key(gm.g1_mul(ck.secret, c.ck_header))
        if c.binding != _binding(bind_key, ek, t_prime, c.core_bytes()):
            return False
        for pid in N:
            slot = ek.notaries[pid].slot
            if c.headers[slot - 1].tag != _member_tag(bind_key, slot, pid, t_prime):
                return False
        return True
    except Exception:
        return False


# -- partial decryption ------------------------------------------------------

def _cp_challenge(b1, p1, b2, p2, a1, a2, context: bytes) -> int:
    data = b"".join(gm.encode(x) for x in (b1, p1, b2, p2, a1, a2)) + context
    return gm.hash_to_scalar(b"DTPKE-CP", data)


def _share_context(c: DtpkeCiphertext, pid: bytes) -> bytes:
    return c.digest() + pid


def dtpke_share_decrypt(dk: DecryptionParams, pid: bytes, usk: int,
                        c: DtpkeCiphertext) -> DecryptionShare:
    if pid not in dk.slots:
        raise UnknownPid(pid.hex())
    slot = dk.slots[pid]
    R = c.headers[slot - 1].ephemeral
    D = gm.g1_mul(usk, R)
    base = uvk_base(pid)
    ctx = _share_context(c, pid)
    k = gm.hash_to_scalar(b"DTPKE-CP-NONCE", gm.encode(usk) + ctx) or 1
    ch = _cp_challenge(base, gm.g1_mul(usk, base), R, D, gm.g1_mul(k, base), gm.g1_mul(k, R), ctx)
    return DecryptionShare(pid, D, ch, (k + ch * usk) % gm.Q)


def open_share(vk: VerificationKey, c: DtpkeCiphertext, share: DecryptionShare):
    """(slot, share value, t') carried by a verified share, else None."""
    rec = vk.notaries.get(share.pid)
    if rec is None or not 1 <= rec.slot <= len(c.headers):
        return None
    R = c.headers[rec.slot - 1].ephemeral
    base = uvk_base(share.pid)
    neg = gm.Q - share.proof_c
    a1 = gm.g1_mul(share.proof_z, base) + gm.g1_mul(neg, rec.uvk)
    a2 = gm.g1_mul(share.proof_z, R) + gm.g1_mul(neg, share.share_point)
    ctx = _share_context(c, share.pid)
    if _cp_challenge(base, rec.uvk, R, share.share_point, a1, a2, ctx) != share.proof_c:
        return None
    key = _slot_key(R, share.share_point, rec.slot)
    try:
        payload = aead_open(key, c.headers[rec.slot - 1].sealed, rec.slot.to_bytes(2, "big"))
        value = gm.decode_scalar(payload[:32])
    except (AuthFailure, DecodeError):
        return None
    t_prime = int.from_bytes(payload[32:], "big")
    if not 1 <= t_prime <= min(vk.t_max, len(c.commitments)):
        return None
    expected = gm.g1_sum(gm.g1_mul(pow(rec.slot, k, gm.Q), C)
                         for k, C in enumerate(c.commitments[:t_prime]))
    if gm.g1_mul(value) != expected:
        return None
    return rec.slot, value, t_prime


def dtpke_share_verify(vk: VerificationKey, pid: bytes, uvk: G1Point,
                       c: DtpkeCiphertext, share: DecryptionShare) -> bool:
    try:
        rec = vk.notaries.get(pid)
        if rec is None or share.pid != pid or rec.uvk != uvk:
            return False
        return open_share(vk, c, share) is not None
    except Exception:
        return False


def dtpke_combine(ck: CombineKey, N: Iterable[bytes], t_prime: int, c: DtpkeCiphertext,
                  shares: Sequence[DecryptionShare]) -> bytes:
    """Recover the plaintext from at least t' valid member shares.

    Invalid shares are dropped; among the valid ones the t' lowest pids are
    used, so the result is a deterministic function of the share set.
    """
    members = set(bytes(p) for p in N)
    opened = {}
    for share in shares:
        if share.pid not in members or share.pid in opened:
            continue
        got = open_share(ck.vk, c, share)
        if got is not None and got[2] == t_prime:
            opened[share.pid] = got
    if len(opened) < t_prime:
        raise InsufficientShares("not enough valid decryption shares")
    chosen = [opened[pid] for pid in sorted(opened)[:t_prime]]
    xs = [slot for slot, _, _ in chosen]
    s = sum(l * v for l, (_, v, _) in zip(gm.lagrange_at_zero(xs), chosen)) % gm.Q
    if not c.commitments or gm.g1_mul(s) != c.commitments[0]:
        raise AuthFailure("reconstructed secret does not match the commitment")
    key = _dem_key(s, gm.g1_mul(ck.secret, c.ck_header))
    return aead_open(key, c.body, _body_aad(c.headers, c.commitments, c.ck_header))
