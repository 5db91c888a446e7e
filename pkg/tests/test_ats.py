from dataclasses import replace
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from detaps import groupmath as gm
from detaps.ats import (AtsSignature, ats_combine, ats_keygen, ats_share_verify, ats_sign,
                        ats_trace, ats_verify)
from detaps.errors import (BadThreshold, InsufficientShares, NotInQuorum, QuorumMismatch,
                           ShareInvalid, WrongQuorumSize)
from detaps.primitives import SchnorrSig
from oracles import schnorr_accepts


@pytest.fixture(scope="module")
def keys_10_5():
    return ats_keygen(10, 5, rng=1)


@pytest.fixture(scope="module")
def keys_7_3():
    return ats_keygen(7, 3, rng=2)


def shares_for(sks, m, S):
    return [ats_sign(sks[i - 1], m, S) for i in S]


def test_keygen_sizes(keys_10_5):
    pk, sks = keys_10_5
    assert pk.n == 10 and pk.t == 5 and len(sks) == 10
    assert [sk.index for sk in sks] == list(range(1, 11))


def test_single_signer_scheme():
    pk, sks = ats_keygen(1, 1, rng=3)
    sig = ats_combine(pk, b"m", [1], [ats_sign(sks[0], b"m", [1])])
    assert ats_trace(pk, b"m", sig) == {1}


@pytest.mark.parametrize("n,t", [(3, 4), (3, 0)])
def test_bad_threshold(n, t):
    with pytest.raises(BadThreshold):
        ats_keygen(n, t)


def test_sign_outside_quorum(keys_7_3):
    _, sks = keys_7_3
    with pytest.raises(NotInQuorum):
        ats_sign(sks[1], b"m", [1, 3, 4])
    with pytest.raises(WrongQuorumSize):
        ats_sign(sks[0], b"m", [1, 2])


def test_combine_and_trace(keys_7_3):
    pk, sks = keys_7_3
    S = (1, 4, 7)
    sig = ats_combine(pk, b"m", S, shares_for(sks, b"m", S))
    assert ats_verify(pk, b"m", sig)
    assert ats_trace(pk, b"m", sig) == frozenset(S)
    assert AtsSignature.from_bytes(sig.to_bytes()) == sig
    assert len(sig.to_bytes()) == AtsSignature.encoded_size(3)


def test_inner_signatures_pass_reference_check(keys_7_3):
    pk, sks = keys_7_3
    S = (1, 4, 7)
    share = ats_sign(sks[3], b"m", S)
    msg = b"ATS" + (1).to_bytes(4, "big") + b"m" + gm.canonical_indices(S)
    assert schnorr_accepts(pk.keys[3], msg, share.inner.to_bytes())


def test_too_few_shares(keys_7_3):
    pk, sks = keys_7_3
    S = (1, 4, 7)
    with pytest.raises(InsufficientShares):
        ats_combine(pk, b"m", S, shares_for(sks, b"m", S)[:2])


def test_flipped_share_names_signer(keys_7_3):
    pk, sks = keys_7_3
    S = (1, 4, 7)
    shares = shares_for(sks, b"m", S)
    bad = replace(shares[1], inner=SchnorrSig(shares[1].inner.c ^ 1, shares[1].inner.z))
    assert not ats_share_verify(pk, b"m", bad)
    with pytest.raises(ShareInvalid) as info:
        ats_combine(pk, b"m", S, [shares[0], bad, shares[2]])
    assert info.value.index == 4


def test_mixed_quorums_do_not_combine(keys_7_3):
    pk, sks = keys_7_3
    a = shares_for(sks, b"m", (1, 2, 3))
    b = shares_for(sks, b"m", (1, 2, 4))
    with pytest.raises(QuorumMismatch):
        ats_combine(pk, b"m", (1, 2, 3), a[:2] + [b[2]])


def test_mutated_signature_rejected(keys_7_3):
    pk, sks = keys_7_3
    S = (2, 3, 5)
    sig = ats_combine(pk, b"m", S, shares_for(sks, b"m", S))
    raw = sig.to_bytes()
    for pos in range(0, 8 * len(raw), 37):
        mutated = bytearray(raw)
        mutated[pos // 8] ^= 1 << (pos % 8)
        try:
            other = AtsSignature.from_bytes(bytes(mutated))
        except Exception:
            continue
        assert not ats_verify(pk, b"m", other)
        assert ats_trace(pk, b"m", other) is None


def test_other_message_rejected(keys_7_3):
    pk, sks = keys_7_3
    S = (2, 3, 5)
    sig = ats_combine(pk, b"m", S, shares_for(sks, b"m", S))
    assert not ats_verify(pk, gm.Drbg(4).random_bytes(16), sig)


def test_relabelled_quorum_rejected(keys_7_3):
    pk, sks = keys_7_3
    sig = ats_combine(pk, b"m", (2, 3, 5), shares_for(sks, b"m", (2, 3, 5)))
    assert not ats_verify(pk, b"m", AtsSignature((2, 3, 6), sig.inner_sigs))


def test_every_short_subset_fails(keys_7_3):
    pk, sks = keys_7_3
    S = (1, 2, 6)
    shares = shares_for(sks, b"m", S)
    for sub in combinations(shares, 2):
        with pytest.raises(InsufficientShares):
            ats_combine(pk, b"m", S, list(sub))


def test_forged_share_never_verifies():
    pk, sks = ats_keygen(5, 3, rng=5)
    rng = gm.Drbg(b"forge")
    for trial in range(1000):
        m = rng.random_bytes(8)
        S = tuple(sorted(rng.sample(range(1, 6), 3)))
        honest = shares_for(sks, m, S)
        victim = rng.randbelow(3)
        forged = replace(honest[victim], inner=SchnorrSig(rng.scalar(), rng.scalar()))
        sig = AtsSignature(S, tuple(s.inner for s in honest[:victim] + [forged]
                                    + honest[victim + 1:]))
        assert not ats_verify(pk, m, sig)


@given(st.data())
@settings(max_examples=30)
def test_combine_traces_exact_quorum(data):
    n = data.draw(st.integers(min_value=1, max_value=12))
    t = data.draw(st.integers(min_value=1, max_value=n))
    S = tuple(sorted(data.draw(st.sets(st.integers(min_value=1, max_value=n),
                                       min_size=t, max_size=t))))
    m = data.draw(st.binary(max_size=64))
    pk, sks = ats_keygen(n, t, rng=data.draw(st.integers(min_value=0, max_value=2 ** 32)))
    sig = ats_combine(pk, m, S, shares_for(sks, m, S))
    assert ats_verify(pk, m, sig)
    assert ats_trace(pk, m, sig) == frozenset(S)
