"""Shared builders for tests: small deployments and hand-built proof instances."""

from dataclasses import dataclass

from detaps import groupmath as gm
from detaps.ats import ats_combine, ats_keygen, ats_sign
from detaps.dtpke import dtpke_encrypt_with_coins, dtpke_join, dtpke_setup
from detaps.kase import kase_encrypt_with_coins, kase_keygen, kase_setup
from detaps.nizk import CombineStatement, CombineWitness, ProverContext
from detaps.primitives import Scheme, com_commit, keygen
from detaps.scenario import Deployment
from detaps.scheme import setup
from detaps.signature import notary_keyword

ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, text: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"
    print(ACCEPTANCE_LINES[number])


def build_system(n=5, t=3, n3=5, seed=1, n1=2, n2=2, groups=4, ttl=8):
    return Deployment(setup(n, n1, n2, n3, t, seed=seed, groups=groups, ttl=ttl), seed)


def pids(dep, positions):
    return [dep.keys.notaries[i].pid for i in positions]


def produce(dep, m, S, notary_positions, t_prime=None, group=0):
    """Post shares for one message and run every combiner; returns the emitted list."""
    if dep.chain.epoch == 0:
        dep.tick()
    gid = dep.gid(group)
    N = pids(dep, notary_positions)
    for i in S:
        dep.submit_share(i, m, S, N, gid, t_prime)
    return dep.run_combiners()


def produce_one(dep, m, S, notary_positions, t_prime=None, group=0):
    out = produce(dep, m, S, notary_positions, t_prime, group)
    assert len(out) == 1
    return out[0]


def trace_target(label=b"target"):
    return keygen(Scheme.PKE, seed=label)


@dataclass
class ProofInstance:
    statement: CombineStatement
    witness: CombineWitness
    context: ProverContext
    attestation: object
    params: object
    mpk: object


def combine_instance(seed=5, n=4, t=2, n3=4, t_prime=2, set_size=3, m=b"proof instance"):
    """A statement/witness pair for the combine relation, built outside any enclave."""
    rng = gm.Drbg(seed)
    ats_pk, sks = ats_keygen(n, t, rng.fork(b"ats"))
    r_pk = rng.scalar()
    com = com_commit(ats_pk.to_bytes(), r_pk)
    authority = dtpke_setup(n3, n3, rng.fork(b"dtpke"))
    notaries = [dtpke_join(authority, i) for i in range(1, n3 + 1)]
    params = kase_setup(2, rng.fork(b"kase"))
    mpk, _ = kase_keygen(rng.fork(b"mpk"))
    attestation = keygen(Scheme.SIG, rng=rng)

    S = tuple(range(1, t + 1))
    sig = ats_combine(ats_pk, m, S, [ats_sign(sks[i - 1], m, S) for i in S])
    plaintext = gm.pad(sig.to_bytes(), 4 + 68 * n)
    dtpke_coins, kase_coins = rng.random_bytes(32), rng.random_bytes(32)
    N = tuple(sorted(nk.pid for nk in notaries[:set_size]))
    keywords = tuple(notary_keyword(pid, 1) for pid in N)
    ct, _ = dtpke_encrypt_with_coins(authority.ek, N, t_prime, plaintext, gm.Drbg(dtpke_coins))
    index, _ = kase_encrypt_with_coins(params, mpk, 1, keywords, n3, gm.Drbg(kase_coins))
    statement = CombineStatement(
        t_bound=n3, com_pk=com, ek_digest=authority.ek.digest(), mpk=mpk.v, m=m,
        sigma_bar_digest=ct.digest(), kem_points=ct.kem_points(), gid=bytes(32),
        index_base=mpk.v + params.ladder_g2[1], c1=index.c1, c2=index.c2,
        entries_digest=index.digest(), attester=attestation.public)
    witness = CombineWitness(N, keywords, ats_pk, sig, r_pk, plaintext, t_prime,
                             dtpke_coins, kase_coins)
    context = ProverContext(authority.ek, params, mpk, 1, n3)
    return ProofInstance(statement, witness, context, attestation, params, mpk)


def flip_bit(data: bytes, bit: int) -> bytes:
    out = bytearray(data)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)
