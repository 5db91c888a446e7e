"""The five DeTAPS algorithms plus the notary response path.

Setup runs as a trusted dealer and seals combiner and tracer secrets into
simulated enclaves. Everything else is split between host-side functions
here and enclave entry points in ``enclave``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from py_arkworks_bls12381 import G1Point

from . import groupmath as gm
from .ats import AtsPublicKey, AtsSecretKey, ats_keygen, ats_sign
from .dtpke import DtpkeAuthority, NotaryKeys, dtpke_join, dtpke_setup, dtpke_share_decrypt
from .enclave import (SHARE_AAD, TRACE_INSUFFICIENT, TRACE_OK, TRACE_VALIDATION,
                      CombinerProgram, EnclaveHandle, TracerProgram, response_aad,
                      trace_result_aad)
from .errors import (BadThreshold, DecodeError, InsufficientShares, SigInvalid,
                     UnknownGroup, UnknownNotary, ValidationFailed)
from .kase import AggregateKey, Trapdoor, kase_extract, kase_keygen, kase_setup, kase_trapdoor
from .nizk import verify_combine
from .primitives import (HybridCiphertext, KeyPair, Scheme, com_commit, keygen, pke_decrypt,
                         pke_encrypt, sig_sign, sig_verify)
from .signature import (DetapsSignature, PublicKey, SharePlaintext, SignatureBody,
                        combine_statement, encode_share_plaintext, eta_message,
                        notary_keyword)


@dataclass
class SystemKeys:
    pk: PublicKey
    ats_pk: AtsPublicKey                 # dealer copy; only enclaves hold it in deployment
    signer_keys: list
    combiner_keys: list                  # KeyPairs that sign eta
    combiners: list                      # EnclaveHandles holding sk^c
    tracers: list                        # EnclaveHandles holding sk^t
    notaries: list                       # NotaryKeys, slot order
    aggregate_key: AggregateKey
    authority: DtpkeAuthority
    signer_tx_keys: list = field(default_factory=list)
    requester_keys: list = field(default_factory=list)


def default_groups(count: int) -> tuple:
    return tuple(f"GROUP-{i}".encode() for i in range(1, count + 1))


def setup(n: int, n1: int, n2: int, n3: int, t: int, seed=None, groups: Sequence[bytes] | int = 4,
          t_max: int | None = None, ttl: int = 8, requesters: int = 1) -> SystemKeys:
    if not 1 <= t <= n:
        raise BadThreshold(f"threshold {t} outside [1, {n}]")
    if min(n1, n3) < 1 or n2 < 0:
        raise BadThreshold("need n1, n3 >= 1")
    if isinstance(groups, int):
        groups = default_groups(groups)
    rng = gm.Drbg(seed)
    ats_pk, signer_keys = ats_keygen(n, t, rng.fork(b"ats"))
    r_pk = rng.scalar()
    com_pk = com_commit(ats_pk.to_bytes(), r_pk)

    combiner_keys = [keygen(Scheme.SIG, rng=rng) for _ in range(n1)]
    enclave_keys = [keygen(Scheme.PKE, rng=rng) for _ in range(max(n1, n2))]
    attestation = [keygen(Scheme.SIG, rng=rng) for _ in range(n1)]

    authority = dtpke_setup(n3, t_max or n3, rng.fork(b"dtpke"))
    notaries = [dtpke_join(authority, i) for i in range(1, n3 + 1)]

    kase_rng = rng.fork(b"kase")
    params = kase_setup(len(groups), kase_rng)
    mpk, msk = kase_keygen(kase_rng)
    k_a = kase_extract(params, msk, range(1, len(groups) + 1))

    pk = PublicKey(n, n1, n2, n3, authority.t_max, com_pk, authority.ek, authority.dk,
                   authority.vk, tuple(k.public for k in combiner_keys),
                   tuple(k.public for k in enclave_keys), tuple(k.public for k in attestation),
                   params, mpk, tuple(bytes(g) for g in groups))
    combiners = [
        EnclaveHandle(CombinerProgram(pk, j, ats_pk, enclave_keys[j].secret, r_pk,
                                      attestation[j].secret, rng.random_bytes(32), ttl),
                      attestation[j].public)
        for j in range(n1)
    ]
    tracers = [
        EnclaveHandle(TracerProgram(pk, j, ats_pk, enclave_keys[j].secret, authority.ck,
                                    rng.random_bytes(32)))
        for j in range(n2)
    ]
    signer_tx = [keygen(Scheme.SIG, rng=rng) for _ in range(n)]
    requester = [keygen(Scheme.SIG, rng=rng) for _ in range(requesters)]
    return SystemKeys(pk, ats_pk, signer_keys, combiner_keys, combiners, tracers, notaries,
                      k_a, authority, signer_tx, requester)


def derive_gid(pk: PublicKey, group: bytes, epoch: int) -> bytes:
    """Pseudonymous group id for one epoch; registers its KASE slot in ``pk``."""
    group = bytes(group)
    if group not in pk.groups:
        raise UnknownGroup(group.decode(errors="replace"))
    data = gm.Writer().blob(group).u64(epoch).getvalue()
    gid = gm.encode(gm.hash_to_scalar(b"GID", data))
    pk.gid_registry[gid] = (pk.groups.index(group) + 1, epoch)
    return gid


def sign(pk: PublicKey, sk: AtsSecretKey, m: bytes, S: Iterable[int], N: Iterable[bytes],
         gid: bytes, combiner_enc_key: G1Point, t_prime: int | None = None,
         rng=None) -> HybridCiphertext:
    """Signature share for quorum S, wrapped for the elected combiner's enclave.

    ``t_prime`` defaults to |N|.
    """
    N = tuple(sorted(set(bytes(p) for p in N)))
    for pid in N:
        if pid not in pk.ek.notaries:
            raise UnknownNotary(pid.hex())
    share = ats_sign(sk, m, S)
    pt = SharePlaintext(bytes(m), share, N, len(N) if t_prime is None else t_prime,
                        gid, pk.epoch_of(gid))
    return pke_encrypt(combiner_enc_key, encode_share_plaintext(pk, pt), rng, SHARE_AAD)


def combine(pk: PublicKey, enclave: EnclaveHandle, combiner: KeyPair, batch: Sequence[bytes],
            epoch: int) -> list[tuple[bytes, DetapsSignature]]:
    """Feed pulled SSL payloads to the enclave; sign each emitted body with eta."""
    w = gm.Writer().u64(epoch)
    for raw in batch:
        w.blob(bytes(raw))
    r = gm.Reader(enclave.call("combine", w.getvalue()))
    out = []
    while r.remaining():
        m = r.blob()
        body = SignatureBody.from_bytes(r.blob(), pk.n3, pk.t_max)
        unsigned = DetapsSignature(body, combiner.public, None)
        eta = sig_sign(combiner.secret, eta_message(m, unsigned.signed_part()))
        out.append((m, DetapsSignature(body, combiner.public, eta)))
    return out


def check_eta(pk: PublicKey, m: bytes, sigma: DetapsSignature) -> bool:
    if pk.combiner_index(sigma.combiner) is None:
        return False
    return sig_verify(sigma.combiner, eta_message(m, sigma.signed_part()), sigma.eta)


def verify(pk: PublicKey, m: bytes, sigma) -> bool:
    try:
        if isinstance(sigma, (bytes, bytearray)):
            sigma = DetapsSignature.from_bytes(bytes(sigma), pk.n3, pk.t_max)
        j = pk.combiner_index(sigma.combiner)
        if j is None or not check_eta(pk, m, sigma):
            return False
        st = combine_statement(pk, m, sigma.body, j)
        return verify_combine(st, sigma.proof)
    except Exception:
        return False


# -- tracing -----------------------------------------------------------------

def notary_trapdoor(notary: NotaryKeys, k_a: AggregateKey, epoch: int) -> Trapdoor:
    return kase_trapdoor(k_a, notary_keyword(notary.pid, epoch))


def notary_share_response(pk: PublicKey, notary: NotaryKeys, m: bytes, sigma: DetapsSignature,
                          tracer_enc_key: G1Point, rng=None) -> HybridCiphertext:
    """Check eta, then wrap this notary's decryption share for the tracer enclave."""
    if not check_eta(pk, m, sigma):
        raise SigInvalid("combiner signature on the traced signature is invalid")
    share = dtpke_share_decrypt(pk.dk, notary.pid, notary.usk, sigma.sigma_bar)
    plain = bytes(notary.pid) + gm.encode(notary.uvk) + share.to_bytes()
    return pke_encrypt(tracer_enc_key, plain, rng, response_aad(sigma.digest()))


def trace(pk: PublicKey, enclave: EnclaveHandle, m: bytes, sigma: DetapsSignature,
          responses: Sequence[bytes], target: G1Point) -> HybridCiphertext | None:
    """Run the tracer enclave. Returns S sealed to ``target``, or None for an invalid sigma.

    The host only sees a status: InsufficientShares or ValidationFailed are
    raised without any count attached.
    """
    w = gm.Writer().blob(m).blob(sigma.to_bytes()).point(target)
    for raw in responses:
        w.blob(bytes(raw))
    out = enclave.call("trace", w.getvalue())
    status = out[0]
    if status == TRACE_OK:
        return HybridCiphertext.from_bytes(out[1:])
    if status == TRACE_INSUFFICIENT:
        raise InsufficientShares("trace failed")
    if status == TRACE_VALIDATION:
        raise ValidationFailed("trace failed")
    return None


def open_trace_result(pk: PublicKey, target_secret: int, sigma: DetapsSignature,
                      sealed: HybridCiphertext) -> frozenset:
    plain = pke_decrypt(target_secret, sealed, trace_result_aad(sigma.digest()))
    r = gm.Reader(gm.unpad(plain))
    quorum = frozenset(r.u32() for _ in range(r.count(pk.n)))
    r.done()
    if not all(1 <= i <= pk.n for i in quorum):
        raise DecodeError("quorum index out of range")
    return quorum
