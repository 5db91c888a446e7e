"""Simulated enclaves: sealed state behind a bytes-only call boundary.

Host code holds an ``EnclaveHandle`` and can only ``call(entry, payload)``;
every byte returned to the host is appended to ``handle.boundary`` so tests
can inspect exactly what left the enclave. Programs keep their secrets in
name-mangled attributes and expose no getters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import groupmath as gm
from .ats import (AtsPublicKey, AtsSignature, ats_combine, ats_share_verify, ats_trace)
from .dtpke import (CombineKey, DecryptionShare, dtpke_combine, dtpke_encrypt_with_coins,
                    dtpke_validate, open_share)
from .errors import (AuthFailure, DecodeError, DetapsError, InsufficientShares,
                     QuorumMismatch, ShareInvalid, ValidationFailed)
from .kase import kase_encrypt_with_coins
from .nizk import CombineWitness, ProverContext, prove_combine
from .primitives import HybridCiphertext, pke_decrypt, pke_encrypt
from .signature import (DetapsSignature, PublicKey, SignatureBody, combine_statement,
                        decode_share_plaintext, notary_keyword)

log = logging.getLogger(__name__)

SHARE_AAD = b"DETAPS-SIGN-SHARE"
TRACE_OK, TRACE_INVALID, TRACE_INSUFFICIENT, TRACE_VALIDATION = 0, 1, 2, 3


def response_aad(sigma_digest: bytes) -> bytes:
    return b"DETAPS-NOTARY-RESPONSE" + sigma_digest


def trace_result_aad(sigma_digest: bytes) -> bytes:
    return b"DETAPS-TRACE-RESULT" + sigma_digest


@dataclass
class BoundaryRecorder:
    outward: list = field(default_factory=list)
    enabled: bool = True

    def record(self, entry: str, data: bytes) -> None:
        if self.enabled:
            self.outward.append((entry, data))

    def transcript(self) -> bytes:
        return b"".join(data for _, data in self.outward)


class EnclaveHandle:
    def __init__(self, program, attestation_public=None):
        self.__program = program
        self.attestation_public = attestation_public
        self.boundary = BoundaryRecorder()

    def call(self, entry: str, payload: bytes) -> bytes:
        if not isinstance(payload, (bytes, bytearray)):
            raise TypeError("enclave payloads must be bytes")
        out = self.__program.dispatch(entry, bytes(payload))
        self.boundary.record(entry, out)
        return out

    def _program_for_tests(self):
        # white-box access for the test suite only; host code never uses it
        return self.__program


def _blobs(r: gm.Reader) -> list[bytes]:
    out = []
    while r.remaining():
        out.append(r.blob())
    return out


@dataclass
class _Pending:
    quorum: tuple
    notaries: tuple
    t_prime: int
    epoch: int
    last_seen: int
    shares: dict = field(default_factory=dict)
    poisoned: bool = False


class CombinerProgram:
    """Holds sk^c = (ATS pk, sk^e, t, ek, r_pk) plus the attestation key."""

    def __init__(self, pk: PublicKey, index: int, ats_pk: AtsPublicKey, enc_secret: int,
                 r_pk: int, attestation_secret: int, seed: bytes, ttl: int = 8):
        self.pk = pk
        self.index = index
        self.__ats_pk = ats_pk
        self.__enc_secret = enc_secret
        self.__r_pk = r_pk
        self.__attestation_secret = attestation_secret
        self.__rng = gm.Drbg(seed)
        self.ttl = ttl
        self.__pending: dict = {}
        self.events: list = []

    def dispatch(self, entry: str, payload: bytes) -> bytes:
        if entry == "combine":
            return self._combine(payload)
        raise ValueError(f"unknown enclave entry {entry!r}")

    def _log(self, kind: str, detail: str = "") -> None:
        self.events.append((kind, detail))
        log.debug("combiner %d enclave: %s %s", self.index, kind, detail)

    def _evict(self, epoch: int) -> None:
        stale = [k for k, p in self.__pending.items() if epoch - p.last_seen >= self.ttl]
        for k in stale:
            self._log("expired", k[1].hex()[:16])
            del self.__pending[k]

    def _accept(self, pt, epoch: int) -> tuple | None:
        if not ats_share_verify(self.__ats_pk, pt.m, pt.share):
            self._log("ShareInvalid", str(ShareInvalid(pt.share.signer_index)))
            return None
        if not 1 <= pt.t_prime <= len(pt.notaries) or any(p not in self.pk.ek.notaries
                                                          for p in pt.notaries):
            self._log("BadNotarySet")
            return None
        key = (pt.m, pt.gid)
        p = self.__pending.get(key)
        if p is None:
            p = self.__pending[key] = _Pending(pt.share.quorum, pt.notaries, pt.t_prime,
                                               pt.epoch, epoch)
        if p.poisoned:
            return None
        if (pt.share.quorum, pt.notaries, pt.t_prime, pt.epoch) != \
                (p.quorum, p.notaries, p.t_prime, p.epoch):
            self._log("QuorumMismatch", str(QuorumMismatch("conflicting share for pending group")))
            p.poisoned, p.shares = True, {}
            return None
        p.last_seen = epoch
        p.shares.setdefault(pt.share.signer_index, pt.share)
        if len(p.shares) >= self.__ats_pk.t:
            return key
        return None

    def _combine(self, payload: bytes) -> bytes:
        r = gm.Reader(payload)
        epoch = r.u64()
        self._evict(epoch)
        ready = []
        for raw in _blobs(r):
            try:
                ct = HybridCiphertext.from_bytes(raw)
                pt = decode_share_plaintext(self.pk, pke_decrypt(self.__enc_secret, ct, SHARE_AAD))
            except (AuthFailure, DecodeError):
                continue        # addressed to another combiner, or junk
            key = self._accept(pt, epoch)
            if key is not None and key not in ready:
                ready.append(key)
        out = gm.Writer()
        for key in ready:
            p = self.__pending.pop(key)
            try:
                body = self._emit(key[0], key[1], p)
            except DetapsError as exc:
                self._log(type(exc).__name__, str(exc))
                continue
            out.blob(key[0]).blob(body.to_bytes())
        return out.getvalue()

    def _emit(self, m: bytes, gid: bytes, p: _Pending) -> SignatureBody:
        pk = self.pk
        sig = ats_combine(self.__ats_pk, m, p.quorum, list(p.shares.values()))
        plaintext = gm.pad(sig.to_bytes(), pk.ats_block)
        dtpke_coins = self.__rng.random_bytes(32)
        kase_coins = self.__rng.random_bytes(32)
        ct, _ = dtpke_encrypt_with_coins(pk.ek, p.notaries, p.t_prime, plaintext,
                                         gm.Drbg(dtpke_coins))
        slot = pk.slot_of(gid)
        keywords = [notary_keyword(pid, p.epoch) for pid in p.notaries]
        index, _ = kase_encrypt_with_coins(pk.kase_params, pk.kase_mpk, slot, keywords, pk.n3,
                                           gm.Drbg(kase_coins))
        body = SignatureBody(ct, index, None, gid)
        st = combine_statement(pk, m, body, self.index)
        witness = CombineWitness(p.notaries, tuple(keywords), self.__ats_pk, sig, self.__r_pk,
                                 plaintext, p.t_prime, dtpke_coins, kase_coins)
        ctx = ProverContext(pk.ek, pk.kase_params, pk.kase_mpk, slot, pk.n3)
        proof = prove_combine(st, witness, self.__attestation_secret, ctx)
        return SignatureBody(ct, index, proof, gid)

    def pending_count(self) -> int:
        return len(self.__pending)


class TracerProgram:
    """Holds sk^t = (sk^e, ck, ATS pk)."""

    def __init__(self, pk: PublicKey, index: int, ats_pk: AtsPublicKey, enc_secret: int,
                 ck: CombineKey, seed: bytes):
        self.pk = pk
        self.index = index
        self.__ats_pk = ats_pk
        self.__enc_secret = enc_secret
        self.__ck = ck
        self.__rng = gm.Drbg(seed)
        self.events: list = []

    def dispatch(self, entry: str, payload: bytes) -> bytes:
        if entry == "trace":
            return self._trace(payload)
        raise ValueError(f"unknown enclave entry {entry!r}")

    def _status(self, code: int, detail: str = "") -> bytes:
        self.events.append((code, detail))
        return bytes([code])

    def _trace(self, payload: bytes) -> bytes:
        from .scheme import verify   # scheme builds enclaves, so import lazily

        pk = self.pk
        r = gm.Reader(payload)
        m = r.blob()
        sig_bytes = r.blob()
        target = r.g1()
        responses = _blobs(r)
        try:
            sigma = DetapsSignature.from_bytes(sig_bytes, pk.n3, pk.t_max)
        except DecodeError:
            return self._status(TRACE_INVALID, "undecodable signature")
        if not verify(pk, m, sigma):
            return self._status(TRACE_INVALID, "signature does not verify")
        digest = sigma.digest()
        c = sigma.sigma_bar

        opened = {}
        for raw in responses:
            try:
                plain = pke_decrypt(self.__enc_secret, HybridCiphertext.from_bytes(raw),
                                    response_aad(digest))
                rr = gm.Reader(plain)
                pid, uvk = rr.raw(16), rr.g1()
                share = DecryptionShare.from_bytes(rr.raw(DecryptionShare.SIZE))
                rr.done()
            except (AuthFailure, DecodeError):
                continue
            rec = pk.vk.notaries.get(pid)
            if share.pid != pid or rec is None or rec.uvk != uvk or pid in opened:
                continue
            got = open_share(pk.vk, c, share)
            if got is not None:
                opened[pid] = (share, got[2])
        if not opened:
            return self._status(TRACE_INSUFFICIENT)
        thresholds = {tp for _, tp in opened.values()}
        if len(thresholds) != 1:
            return self._status(TRACE_VALIDATION, "shares disagree on the threshold")
        t_prime = thresholds.pop()
        responders = sorted(opened)
        if not dtpke_validate(pk.ek, responders, t_prime, c, self.__ck):
            return self._status(TRACE_VALIDATION, str(ValidationFailed("ValidateCT rejected")))
        try:
            plaintext = dtpke_combine(self.__ck, responders, t_prime, c,
                                      [opened[p][0] for p in responders])
        except InsufficientShares:
            return self._status(TRACE_INSUFFICIENT)
        except AuthFailure:
            return self._status(TRACE_VALIDATION, "combine failed authentication")
        try:
            ats_sig = AtsSignature.from_bytes(gm.unpad(plaintext))
        except DecodeError:
            return self._status(TRACE_INVALID, "plaintext is not an ATS signature")
        quorum = ats_trace(self.__ats_pk, m, ats_sig)
        if quorum is None:
            return self._status(TRACE_INVALID, "ATS trace failed")
        sealed = pke_encrypt(target, gm.pad(gm.canonical_indices(quorum), pk.quorum_block),
                             self.__rng, trace_result_aad(digest))
        self.events.append((TRACE_OK, ""))
        return bytes([TRACE_OK]) + sealed.to_bytes()
