"""Public key bundle and the wire formats shared by hosts, enclaves and the chain.

The signature encoding is positional: every repeated part has a length fixed
by (n3, t_max), so no count field that could echo t or t' ever leaves an
enclave.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from py_arkworks_bls12381 import G1Point

from . import groupmath as gm
from .ats import AtsShare
from .dtpke import (HEADER_BYTES, PID_BYTES, DecryptionParams, DtpkeCiphertext,
                    EncryptionKey, SlotHeader, VerificationKey)
from .errors import DecodeError, UnknownGroup
from .kase import KaseIndex, KaseParams, MasterPublicKey
from .nizk import CombineProof, CombineStatement, Commitments, Responses
from .primitives import Commitment, SchnorrSig


@dataclass
class PublicKey:
    n: int
    n1: int
    n2: int
    n3: int
    t_max: int
    com_pk: Commitment
    ek: EncryptionKey
    dk: DecryptionParams
    vk: VerificationKey
    combiner_keys: tuple      # Schnorr keys that sign eta
    enclave_keys: tuple       # PKE keys, one per enclave slot
    attesters: tuple          # attestation keys of the combiner enclaves
    kase_params: KaseParams
    kase_mpk: MasterPublicKey
    groups: tuple             # group tokens; slot = position + 1
    gid_registry: dict = field(default_factory=dict, compare=False)  # gid -> (slot, epoch)

    def to_bytes(self) -> bytes:
        w = (gm.Writer().u32(self.n).u32(self.n1).u32(self.n2).u32(self.n3).u32(self.t_max)
             .raw(self.com_pk.to_bytes()).blob(self.ek.to_bytes()))
        for group in (self.combiner_keys, self.enclave_keys, self.attesters):
            w.u32(len(group))
            for p in group:
                w.point(p)
        w.blob(self.kase_params.to_bytes()).point(self.kase_mpk.v).u32(len(self.groups))
        for g in self.groups:
            w.blob(g)
        return w.getvalue()

    def slot_of(self, gid: bytes) -> int:
        try:
            return self.gid_registry[gid][0]
        except KeyError:
            raise UnknownGroup(gid.hex()) from None

    def epoch_of(self, gid: bytes) -> int:
        try:
            return self.gid_registry[gid][1]
        except KeyError:
            raise UnknownGroup(gid.hex()) from None

    def combiner_index(self, key: G1Point) -> int | None:
        for j, k in enumerate(self.combiner_keys):
            if k == key:
                return j
        return None

    @property
    def share_block(self) -> int:
        # u32 signer, canonical quorum of at most n indices, Schnorr signature
        return 4 + 4 + 4 * self.n + SchnorrSig.SIZE

    @property
    def notary_block(self) -> int:
        return 4 + (4 + PID_BYTES) * self.n3

    @property
    def ats_block(self) -> int:
        return 4 + (4 + SchnorrSig.SIZE) * self.n

    @property
    def quorum_block(self) -> int:
        return 4 + 4 * self.n

    def signature_size(self) -> int:
        return len(DetapsSignature.placeholder(self).to_bytes())


def notary_keyword(pid: bytes, epoch: int) -> bytes:
    return bytes(pid) + epoch.to_bytes(8, "big")


# -- signer plaintext --------------------------------------------------------

@dataclass(frozen=True)
class SharePlaintext:
    m: bytes
    share: AtsShare
    notaries: tuple
    t_prime: int
    gid: bytes
    epoch: int


def _share_bytes(share: AtsShare) -> bytes:
    return (gm.Writer().u32(share.signer_index).raw(gm.canonical_indices(share.quorum))
            .raw(share.inner.to_bytes()).getvalue())


def _read_share(data: bytes) -> AtsShare:
    r = gm.Reader(data)
    index = r.u32()
    quorum = tuple(r.u32() for _ in range(r.count(1 << 16)))
    if list(quorum) != sorted(set(quorum)):
        raise DecodeError("quorum must be sorted and distinct")
    inner = SchnorrSig.from_bytes(r.raw(SchnorrSig.SIZE))
    r.done()
    return AtsShare(index, quorum, inner)


def encode_share_plaintext(pk: PublicKey, pt: SharePlaintext) -> bytes:
    """m, then the share padded to n signers, N padded to n3 pids, t', gid, epoch."""
    return (gm.Writer().blob(pt.m)
            .raw(gm.pad(_share_bytes(pt.share), pk.share_block))
            .raw(gm.pad(gm.canonical_tokens(pt.notaries), pk.notary_block))
            .u16(pt.t_prime).raw(pt.gid).u64(pt.epoch).getvalue())


def decode_share_plaintext(pk: PublicKey, data: bytes) -> SharePlaintext:
    r = gm.Reader(data)
    m = r.blob()
    share = _read_share(gm.unpad(r.raw(pk.share_block + 4)))
    nr = gm.Reader(gm.unpad(r.raw(pk.notary_block + 4)))
    notaries = tuple(nr.blob(PID_BYTES) for _ in range(nr.count(pk.n3)))
    nr.done()
    if list(notaries) != sorted(set(notaries)) or any(len(p) != PID_BYTES for p in notaries):
        raise DecodeError("notary set must be sorted, distinct pids")
    t_prime = r.u16()
    gid = r.raw(gm.SCALAR_BYTES)
    epoch = r.u64()
    r.done()
    return SharePlaintext(m, share, notaries, t_prime, gid, epoch)


# -- the public signature ----------------------------------------------------

def _write_proof(w: gm.Writer, proof: CombineProof) -> None:
    c, r = proof.commitments, proof.responses
    w.point(c.open_a).point(c.index_a1).point(c.index_a2)
    for a in c.enc:
        w.point(a)
    w.scalar(r.z_msg).scalar(r.z_rand).scalar(r.z_tau)
    for z in r.z_enc:
        w.scalar(z)
    w.raw(proof.attestation.to_bytes())


def _read_proof(r: gm.Reader, n3: int) -> CombineProof:
    open_a, a1, a2 = r.g1(), r.g2(), r.g2()
    enc = tuple(r.g1() for _ in range(n3 + 1))
    zm, zr, zt = r.scalar(), r.scalar(), r.scalar()
    z_enc = tuple(r.scalar() for _ in range(n3 + 1))
    att = SchnorrSig.from_bytes(r.raw(SchnorrSig.SIZE))
    return CombineProof(Commitments(open_a, a1, a2, enc), Responses(zm, zr, zt, z_enc), att)


@dataclass(frozen=True)
class SignatureBody:
    """Everything the combiner enclave emits; the host adds its key and eta."""
    sigma_bar: DtpkeCiphertext
    index: KaseIndex
    proof: CombineProof
    gid: bytes

    def to_bytes(self) -> bytes:
        ct = self.sigma_bar
        w = gm.Writer()
        for h in ct.headers:
            w.raw(h.to_bytes())
        for c in ct.commitments:
            w.point(c)
        w.point(ct.ck_header).blob(ct.body).raw(ct.binding)
        w.point(self.index.c1).point(self.index.c2)
        for e in self.index.entries:
            w.raw(e)
        _write_proof(w, self.proof)
        return w.raw(self.gid).getvalue()

    @classmethod
    def read(cls, r: gm.Reader, n3: int, t_max: int) -> "SignatureBody":
        headers = tuple(SlotHeader.read(r) for _ in range(n3))
        commitments = tuple(r.g1() for _ in range(t_max))
        ck_header = r.g1()
        body = r.blob(1 << 24)
        binding = r.raw(gm.DIGEST_BYTES)
        ct = DtpkeCiphertext(headers, commitments, ck_header, binding, body)
        c1, c2 = r.g2(), r.g2()
        index = KaseIndex(c1, c2, tuple(r.raw(gm.DIGEST_BYTES) for _ in range(n3)))
        proof = _read_proof(r, n3)
        gid = r.raw(gm.SCALAR_BYTES)
        return cls(ct, index, proof, gid)

    @classmethod
    def from_bytes(cls, data: bytes, n3: int, t_max: int) -> "SignatureBody":
        r = gm.Reader(data)
        body = cls.read(r, n3, t_max)
        r.done()
        return body


@dataclass(frozen=True)
class DetapsSignature:
    body: SignatureBody
    combiner: G1Point
    eta: SchnorrSig

    @property
    def sigma_bar(self) -> DtpkeCiphertext:
        return self.body.sigma_bar

    @property
    def index(self) -> KaseIndex:
        return self.body.index

    @property
    def proof(self) -> CombineProof:
        return self.body.proof

    @property
    def gid(self) -> bytes:
        return self.body.gid

    def signed_part(self) -> bytes:
        return self.body.to_bytes() + gm.encode(self.combiner)

    def to_bytes(self) -> bytes:
        return self.signed_part() + self.eta.to_bytes()

    def digest(self) -> bytes:
        return gm.digest(b"DETAPS-SIGMA", self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes, n3: int, t_max: int) -> "DetapsSignature":
        r = gm.Reader(data)
        body = SignatureBody.read(r, n3, t_max)
        combiner = r.g1()
        eta = SchnorrSig.from_bytes(r.raw(SchnorrSig.SIZE))
        r.done()
        return cls(body, combiner, eta)

    @classmethod
    def placeholder(cls, pk: PublicKey) -> "DetapsSignature":
        """An all-generator signature with the real layout, for size accounting."""
        g1, g2 = gm.G1_GEN, gm.G2_GEN
        body_len = pk.ats_block + 4 + 16
        ct = DtpkeCiphertext(
            tuple(SlotHeader(g1, bytes(HEADER_BYTES - gm.G1_BYTES - 16), bytes(16))
                  for _ in range(pk.n3)),
            (g1,) * pk.t_max, g1, bytes(gm.DIGEST_BYTES), bytes(body_len))
        index = KaseIndex(g2, g2, (bytes(gm.DIGEST_BYTES),) * pk.n3)
        proof = CombineProof(Commitments(g1, g2, g2, (g1,) * (pk.n3 + 1)),
                             Responses(0, 0, 0, (0,) * (pk.n3 + 1)), SchnorrSig(0, 0))
        return cls(SignatureBody(ct, index, proof, bytes(32)), g1, SchnorrSig(0, 0))


def eta_message(m: bytes, signed_part: bytes) -> bytes:
    return gm.Writer().raw(b"DETAPS-ETA").blob(m).raw(signed_part).getvalue()


def combine_statement(pk: PublicKey, m: bytes, body: SignatureBody,
                      combiner_index: int) -> CombineStatement:
    slot = pk.slot_of(body.gid)
    ct = body.sigma_bar
    return CombineStatement(
        t_bound=pk.t_max,
        com_pk=pk.com_pk,
        ek_digest=pk.ek.digest(),
        mpk=pk.kase_mpk.v,
        m=bytes(m),
        sigma_bar_digest=ct.digest(),
        kem_points=ct.kem_points(),
        gid=body.gid,
        index_base=pk.kase_mpk.v + pk.kase_params.ladder_g2[slot],
        c1=body.index.c1,
        c2=body.index.c2,
        entries_digest=body.index.digest(),
        attester=pk.attesters[combiner_index],
    )
