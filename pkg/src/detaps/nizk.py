"""Fiat-Shamir proof for the combiner's relation, plus enclave attestation.

Sigma-provable clauses:
  * knowledge of an opening (pk, r_pk) of com_pk (Okamoto proof);
  * knowledge of tau with c1 = tau*g2 and c2 = tau*(v + g2_slot) (DLEQ);
  * knowledge of the exponent behind every KEM point of the DTPKE ciphertext.
The clauses "N is a subset of the notary universe" and "the encrypted
plaintext is a valid ATS signature under the committed key" are checked by
the prover (the enclave) and vouched for by its attestation signature.

All clauses share one challenge, hashed over the statement and every
commitment-phase message in a fixed order under the tag ``FS-COMBINE``.
"""

from __future__ import annotations

from dataclasses import dataclass

from py_arkworks_bls12381 import G1Point, G2Point

from . import groupmath as gm
from .ats import AtsPublicKey, AtsSignature, ats_verify
from .dtpke import EncryptionKey, dtpke_encrypt_with_coins
from .errors import DecodeError, WitnessMismatch
from .kase import KaseParams, MasterPublicKey, kase_encrypt_with_coins
from .primitives import (PEDERSEN_H, Commitment, SchnorrSig, com_verify, message_scalar,
                         sig_sign, sig_verify)

FS_TAG = b"FS-COMBINE"


@dataclass(frozen=True)
class CombineStatement:
    t_bound: int
    com_pk: Commitment
    ek_digest: bytes
    mpk: G2Point
    m: bytes
    sigma_bar_digest: bytes
    kem_points: tuple
    gid: bytes
    index_base: G2Point
    c1: G2Point
    c2: G2Point
    entries_digest: bytes
    attester: G1Point

    def to_bytes(self) -> bytes:
        w = (gm.Writer().u32(self.t_bound).raw(self.com_pk.to_bytes()).raw(self.ek_digest)
             .point(self.mpk).blob(self.m).raw(self.sigma_bar_digest).u32(len(self.kem_points)))
        for p in self.kem_points:
            w.point(p)
        return (w.blob(self.gid).point(self.index_base).point(self.c1).point(self.c2)
                .raw(self.entries_digest).point(self.attester).getvalue())


@dataclass(frozen=True)
class CombineWitness:
    notaries: tuple
    keywords: tuple
    ats_pk: AtsPublicKey
    ats_sig: AtsSignature
    r_pk: int
    plaintext: bytes
    t_prime: int
    dtpke_coins: bytes
    kase_coins: bytes


@dataclass(frozen=True)
class ProverContext:
    ek: EncryptionKey
    kase_params: KaseParams
    kase_mpk: MasterPublicKey
    slot: int
    index_size: int


@dataclass(frozen=True)
class Commitments:
    open_a: G1Point
    index_a1: G2Point
    index_a2: G2Point
    enc: tuple

    def to_bytes(self) -> bytes:
        w = gm.Writer().point(self.open_a).point(self.index_a1).point(self.index_a2).u32(len(self.enc))
        for a in self.enc:
            w.point(a)
        return w.getvalue()


@dataclass(frozen=True)
class Responses:
    z_msg: int
    z_rand: int
    z_tau: int
    z_enc: tuple

    def to_bytes(self) -> bytes:
        w = gm.Writer().scalar(self.z_msg).scalar(self.z_rand).scalar(self.z_tau).u32(len(self.z_enc))
        for z in self.z_enc:
            w.scalar(z)
        return w.getvalue()


@dataclass(frozen=True)
class CombineProof:
    commitments: Commitments
    responses: Responses
    attestation: SchnorrSig

    @property
    def pok_open(self):
        return (self.commitments.open_a, self.responses.z_msg, self.responses.z_rand)

    @property
    def pok_enc(self):
        c, r = self.commitments, self.responses
        return ((c.index_a1, c.index_a2, r.z_tau),) + tuple(zip(c.enc, r.z_enc))

    def transcript_bytes(self) -> bytes:
        return self.commitments.to_bytes() + self.responses.to_bytes()

    def to_bytes(self) -> bytes:
        return self.transcript_bytes() + self.attestation.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, max_points: int = 4096) -> "CombineProof":
        r = gm.Reader(data)
        open_a, a1, a2 = r.g1(), r.g2(), r.g2()
        enc = tuple(r.g1() for _ in range(r.count(max_points)))
        zm, zr, zt = r.scalar(), r.scalar(), r.scalar()
        z_enc = tuple(r.scalar() for _ in range(r.count(max_points)))
        att = SchnorrSig.from_bytes(r.raw(SchnorrSig.SIZE))
        r.done()
        if len(z_enc) != len(enc):
            raise DecodeError("commitment/response count mismatch")
        return cls(Commitments(open_a, a1, a2, enc), Responses(zm, zr, zt, z_enc), att)


def fs_challenge(statement: CombineStatement, commitments: Commitments) -> int:
    return gm.hash_to_scalar(FS_TAG, statement.to_bytes() + commitments.to_bytes())


def _attested_message(statement: CombineStatement, transcript: bytes) -> bytes:
    return gm.Writer().raw(b"ATTEST").blob(statement.to_bytes()).blob(transcript).getvalue()


def check_relation(st: CombineStatement, w: CombineWitness, ctx: ProverContext):
    """Re-derive every public object from the witness; return the exponents."""
    if not 1 <= w.t_prime <= len(w.notaries) <= st.t_bound:
        raise WitnessMismatch("need 1 <= t' <= |N| <= t_bound")
    if any(pid not in ctx.ek.notaries for pid in w.notaries):
        raise WitnessMismatch("notary set is not a subset of the registered notaries")
    if ctx.ek.digest() != st.ek_digest:
        raise WitnessMismatch("encryption key digest mismatch")
    if not com_verify(w.ats_pk.to_bytes(), w.r_pk, st.com_pk):
        raise WitnessMismatch("commitment does not open to the ATS public key")
    if not ats_verify(w.ats_pk, st.m, w.ats_sig):
        raise WitnessMismatch("ATS signature does not verify")
    if gm.unpad(w.plaintext) != w.ats_sig.to_bytes():
        raise WitnessMismatch("plaintext is not the ATS signature")
    ct, coins = dtpke_encrypt_with_coins(ctx.ek, w.notaries, w.t_prime, w.plaintext,
                                         gm.Drbg(w.dtpke_coins))
    if ct.digest() != st.sigma_bar_digest or ct.kem_points() != st.kem_points:
        raise WitnessMismatch("ciphertext is not the encryption of the ATS signature")
    index, tau = kase_encrypt_with_coins(ctx.kase_params, ctx.kase_mpk, ctx.slot, w.keywords,
                                         ctx.index_size, gm.Drbg(w.kase_coins))
    if (index.c1, index.c2) != (st.c1, st.c2) or index.digest() != st.entries_digest:
        raise WitnessMismatch("index does not encrypt (gid, N)")
    if st.index_base != ctx.kase_mpk.v + ctx.kase_params.ladder_g2[ctx.slot]:
        raise WitnessMismatch("index base does not match the gid slot")
    return coins.slot_exponents + (coins.ck_exponent,), tau


def prove_combine(statement: CombineStatement, witness: CombineWitness,
                  attestation_sk: int, ctx: ProverContext) -> CombineProof:
    exps, tau = check_relation(statement, witness, ctx)
    msg = message_scalar(witness.ats_pk.to_bytes())
    secrets_ = gm.Writer().scalar(msg).scalar(witness.r_pk).scalar(tau)
    for e in exps:
        secrets_.scalar(e)
    nonce_rng = gm.Drbg(gm.digest(b"FS-NONCE", secrets_.getvalue() + statement.to_bytes()))
    k_msg, k_rand, k_tau = nonce_rng.scalar(), nonce_rng.scalar(), nonce_rng.scalar()
    k_enc = [nonce_rng.scalar() for _ in exps]
    commits = Commitments(
        gm.g1_mul(k_msg) + gm.g1_mul(k_rand, PEDERSEN_H),
        gm.g2_mul(k_tau),
        gm.g2_mul(k_tau, statement.index_base),
        tuple(gm.g1_mul(k) for k in k_enc),
    )
    c = fs_challenge(statement, commits)
    responses = Responses(
        (k_msg + c * msg) % gm.Q,
        (k_rand + c * witness.r_pk) % gm.Q,
        (k_tau + c * tau) % gm.Q,
        tuple((k + c * e) % gm.Q for k, e in zip(k_enc, exps)),
    )
    transcript = commits.to_bytes() + responses.to_bytes()
    att = sig_sign(attestation_sk, _attested_message(statement, transcript))
    return CombineProof(commits, responses, att)


def verify_transcript(st: CombineStatement, commits: Commitments, c: int,
                      responses: Responses) -> bool:
    """The interactive verifier's check for a given challenge."""
    if len(commits.enc) != len(st.kem_points) or len(responses.z_enc) != len(st.kem_points):
        return False
    neg = gm.Q - c
    if gm.g1_mul(responses.z_msg) + gm.g1_mul(responses.z_rand, PEDERSEN_H) \
            + gm.g1_mul(neg, st.com_pk.point) != commits.open_a:
        return False
    if gm.g2_mul(responses.z_tau) + gm.g2_mul(neg, st.c1) != commits.index_a1:
        return False
    if gm.g2_mul(responses.z_tau, st.index_base) + gm.g2_mul(neg, st.c2) != commits.index_a2:
        return False
    for a, z, p in zip(commits.enc, responses.z_enc, st.kem_points):
        if gm.g1_mul(z) + gm.g1_mul(neg, p) != a:
            return False
    return True


def verify_combine(statement: CombineStatement, proof: CombineProof) -> bool:
    try:
        if not sig_verify(statement.attester,
                          _attested_message(statement, proof.transcript_bytes()),
                          proof.attestation):
            return False
        c = fs_challenge(statement, proof.commitments)
        return verify_transcript(statement, proof.commitments, c, proof.responses)
    except Exception:
        return False


def simulate_transcript(st: CombineStatement, c: int, rng=None) -> tuple[Commitments, Responses]:
    """Honest-verifier simulator: choose the challenge first, solve for commitments."""
    rng = gm.as_rng(rng)
    neg = gm.Q - c
    zm, zr, zt = rng.scalar(), rng.scalar(), rng.scalar()
    z_enc = tuple(rng.scalar() for _ in st.kem_points)
    commits = Commitments(
        gm.g1_mul(zm) + gm.g1_mul(zr, PEDERSEN_H) + gm.g1_mul(neg, st.com_pk.point),
        gm.g2_mul(zt) + gm.g2_mul(neg, st.c1),
        gm.g2_mul(zt, st.index_base) + gm.g2_mul(neg, st.c2),
        tuple(gm.g1_mul(z) + gm.g1_mul(neg, p) for z, p in zip(z_enc, st.kem_points)),
    )
    return commits, Responses(zm, zr, zt, z_enc)
