from collections import Counter
from dataclasses import replace

import pytest

from detaps import groupmath as gm
from detaps.errors import WitnessMismatch
from detaps.nizk import (CombineProof, Commitments, Responses, fs_challenge, prove_combine,
                         simulate_transcript, verify_combine, verify_transcript)
from helpers import combine_instance, flip_bit
from oracles import scalar_from_tag


@pytest.fixture(scope="module")
def inst():
    return combine_instance()


@pytest.fixture(scope="module")
def proof(inst):
    return prove_combine(inst.statement, inst.witness, inst.attestation.secret, inst.context)


def test_completeness(inst, proof):
    assert verify_combine(inst.statement, proof)
    assert CombineProof.from_bytes(proof.to_bytes()) == proof


def test_completeness_across_thresholds():
    for tp, size in [(1, 1), (1, 4), (3, 3), (4, 4)]:
        inst = combine_instance(seed=tp * 10 + size, t_prime=tp, set_size=size)
        p = prove_combine(inst.statement, inst.witness, inst.attestation.secret, inst.context)
        assert verify_combine(inst.statement, p)


def test_challenge_is_hash_of_statement_and_commitments(inst, proof):
    data = inst.statement.to_bytes() + proof.commitments.to_bytes()
    assert fs_challenge(inst.statement, proof.commitments) == scalar_from_tag(b"FS-COMBINE", data)


def test_deterministic(inst, proof):
    again = prove_combine(inst.statement, inst.witness, inst.attestation.secret, inst.context)
    assert again.to_bytes() == proof.to_bytes()


@pytest.mark.parametrize("field,value", [
    ("r_pk", 12345), ("t_prime", 3), ("dtpke_coins", bytes(32)), ("kase_coins", bytes(32)),
])
def test_perturbed_witness_rejected(inst, field, value):
    bad = replace(inst.witness, **{field: value})
    with pytest.raises(WitnessMismatch):
        prove_combine(inst.statement, bad, inst.attestation.secret, inst.context)


def test_witness_notaries_outside_universe(inst):
    bad = replace(inst.witness, notaries=inst.witness.notaries[:-1] + (bytes(16),))
    with pytest.raises(WitnessMismatch):
        prove_combine(inst.statement, bad, inst.attestation.secret, inst.context)


def test_proof_mutation_sweep(inst, proof):
    raw = proof.to_bytes()
    rng = gm.Drbg(b"proof-sweep")
    for _ in range(256):
        mutated = flip_bit(raw, rng.randbelow(8 * len(raw)))
        try:
            p = CombineProof.from_bytes(mutated)
        except Exception:
            continue
        assert not verify_combine(inst.statement, p)


def test_statement_mutation_sweep(inst, proof):
    st = inst.statement
    rng = gm.Drbg(b"statement-sweep")
    fields = {
        "m": lambda v: flip_bit(v, rng.randbelow(8 * len(v))),
        "sigma_bar_digest": lambda v: flip_bit(v, rng.randbelow(256)),
        "entries_digest": lambda v: flip_bit(v, rng.randbelow(256)),
        "ek_digest": lambda v: flip_bit(v, rng.randbelow(256)),
        "gid": lambda v: flip_bit(v, rng.randbelow(256)),
        "t_bound": lambda v: v ^ (1 << rng.randbelow(8)),
        "kem_points": lambda v: v[:-1] + (v[-1] + gm.G1_GEN,),
        "c1": lambda v: v + gm.G2_GEN,
        "c2": lambda v: v + gm.G2_GEN,
        "index_base": lambda v: v + gm.G2_GEN,
    }
    names = sorted(fields)
    for i in range(256):
        name = names[i % len(names)]
        mutated = replace(st, **{name: fields[name](getattr(st, name))})
        assert not verify_combine(mutated, proof), name


def test_transcript_without_attestation_still_sound(inst, proof):
    # the sigma part alone must reject a mutated statement, independent of the attestation
    c = fs_challenge(inst.statement, proof.commitments)
    assert verify_transcript(inst.statement, proof.commitments, c, proof.responses)
    other = replace(inst.statement, c1=inst.statement.c1 + gm.G2_GEN)
    assert not verify_transcript(other, proof.commitments, fs_challenge(other, proof.commitments),
                                 proof.responses)


def test_transplant_rejected(inst, proof):
    other = combine_instance(seed=99)
    assert not verify_combine(other.statement, proof)


def test_forged_transcripts_never_verify(inst):
    st = inst.statement
    rng = gm.Drbg(b"forge-transcripts")
    k = len(st.kem_points)
    for _ in range(10_000):
        commits = Commitments(gm.g1_mul(rng.scalar()), gm.G2_GEN, gm.G2_GEN,
                              tuple(gm.G1_GEN for _ in range(k)))
        responses = Responses(rng.scalar(), rng.scalar(), rng.scalar(), (0,) * k)
        assert not verify_transcript(st, commits, fs_challenge(st, commits), responses)


def test_simulator_transcripts_verify(inst):
    rng = gm.Drbg(b"simulate")
    for _ in range(20):
        c = rng.scalar()
        commits, responses = simulate_transcript(inst.statement, c, rng)
        assert verify_transcript(inst.statement, commits, c, responses)


def test_simulated_bytes_look_like_honest_ones():
    """Byte histograms of response scalars: honest and simulated both look uniform."""
    rng = gm.Drbg(b"histogram")
    honest, simulated = Counter(), Counter()
    for i in range(12):
        inst = combine_instance(seed=1000 + i, m=rng.random_bytes(8))
        p = prove_combine(inst.statement, inst.witness, inst.attestation.secret, inst.context)
        honest.update(p.responses.to_bytes())
        c = fs_challenge(inst.statement, p.commitments)
        _, resp = simulate_transcript(inst.statement, c, rng)
        simulated.update(resp.to_bytes())
    total_h, total_s = sum(honest.values()), sum(simulated.values())
    # total variation distance between the two byte histograms
    tvd = sum(abs(honest[b] / total_h - simulated[b] / total_s) for b in range(256)) / 2
    assert tvd < 0.25
    # and neither is far from uniform: at most a few bytes values missing
    assert len(honest) > 200 and len(simulated) > 200
