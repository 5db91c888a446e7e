from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from detaps import groupmath as gm
from detaps.dtpke import (DecryptionShare, DtpkeCiphertext, SlotHeader, dtpke_combine,
                         dtpke_encrypt, dtpke_join, dtpke_setup, dtpke_share_decrypt,
                         dtpke_share_verify, dtpke_validate)
from detaps.errors import (AuthFailure, BadBound, DecodeError, InsufficientShares,
                           ThresholdTooLarge, UnknownPid)
from oracles import combine_should_succeed, small_subsets


def make_authority(n3, t_max=None, seed=1):
    auth = dtpke_setup(n3, t_max or n3, rng=seed)
    return auth, [dtpke_join(auth, i) for i in range(1, n3 + 1)]


def shares(auth, notaries, c):
    return [dtpke_share_decrypt(auth.dk, nk.pid, nk.usk, c) for nk in notaries]


@pytest.fixture(scope="module")
def five():
    auth, notaries = make_authority(5, seed=11)
    N = [nk.pid for nk in notaries]
    c = dtpke_encrypt(auth.ek, N, 3, b"five notaries", rng=12)
    return auth, notaries, N, c


def test_setup_and_join_distinct_pids():
    auth, notaries = make_authority(10)
    assert len({nk.pid for nk in notaries}) == 10
    assert auth.ek.n3 == 10 and auth.ek.t_max == 10


def test_rejoin_rotates_pid():
    auth, notaries = make_authority(3)
    again = dtpke_join(auth, 2)
    assert again.pid != notaries[1].pid
    assert again.pid in auth.ek.notaries and notaries[1].pid not in auth.ek.notaries


@pytest.mark.parametrize("n3,t_max", [(5, 0), (5, 6), (0, 0)])
def test_bad_bound(n3, t_max):
    with pytest.raises(BadBound):
        dtpke_setup(n3, t_max)


def test_encrypt_argument_errors(five):
    auth, _, N, _ = five
    with pytest.raises(ThresholdTooLarge):
        dtpke_encrypt(auth.ek, N[:2], 3, b"x")
    with pytest.raises(UnknownPid):
        dtpke_encrypt(auth.ek, [bytes(16)], 1, b"x")


def test_three_of_five_recover(five):
    auth, notaries, N, c = five
    assert dtpke_combine(auth.ck, N, 3, c, shares(auth, notaries[:3], c)) == b"five notaries"


def test_single_notary_degenerate():
    auth, notaries = make_authority(4, seed=2)
    c = dtpke_encrypt(auth.ek, [notaries[2].pid], 1, b"solo")
    got = dtpke_combine(auth.ck, [notaries[2].pid], 1, c, shares(auth, notaries[2:3], c))
    assert got == b"solo"


def test_size_depends_only_on_n3_and_bound():
    auth, notaries = make_authority(10, seed=3)
    pids = [nk.pid for nk in notaries]
    lengths = {len(dtpke_encrypt(auth.ek, pids[:size], tp, b"m" * 100).to_bytes())
               for size in range(1, 11) for tp in range(1, size + 1)}
    assert len(lengths) == 1


def test_serialisation_round_trip(five):
    _, _, _, c = five
    assert DtpkeCiphertext.from_bytes(c.to_bytes()) == c


def test_validate(five):
    auth, notaries, N, c = five
    ek, ck = auth.ek, auth.ck
    assert dtpke_validate(ek, N, 3, c, ck)
    assert dtpke_validate(ek, N[1:4], 3, c, ck)
    assert not dtpke_validate(ek, N, 2, c, ck)
    h = c.headers[0]
    mutated = replace(c, headers=(SlotHeader(h.ephemeral, h.sealed, bytes(16)),) + c.headers[1:])
    assert not dtpke_validate(ek, N, 3, mutated, ck)
    moved = replace(c, headers=(SlotHeader(gm.g1_mul(7), h.sealed, h.tag),) + c.headers[1:])
    assert not dtpke_validate(ek, N, 3, moved, ck)
    wrong_ck = replace(ck, secret=ck.secret + 1)
    assert not dtpke_validate(ek, N, 3, c, wrong_ck)


def test_validate_wrong_set():
    auth, notaries = make_authority(6, seed=4)
    pids = [nk.pid for nk in notaries]
    c = dtpke_encrypt(auth.ek, pids[:4], 2, b"x")
    assert dtpke_validate(auth.ek, pids[:4], 2, c, auth.ck)
    swapped = pids[:3] + [pids[5]]
    assert not dtpke_validate(auth.ek, swapped, 2, c, auth.ck)


def test_share_verify(five):
    auth, notaries, N, c = five
    nk = notaries[0]
    share = dtpke_share_decrypt(auth.dk, nk.pid, nk.usk, c)
    assert dtpke_share_verify(auth.vk, nk.pid, nk.uvk, c, share)
    assert DecryptionShare.from_bytes(share.to_bytes()) == share
    bad = replace(share, proof_z=(share.proof_z + 1) % gm.Q)
    assert not dtpke_share_verify(auth.vk, nk.pid, nk.uvk, c, bad)
    assert not dtpke_share_verify(auth.vk, notaries[1].pid, notaries[1].uvk, c, share)


def test_non_member_share_rejected():
    auth, notaries = make_authority(5, seed=5)
    c = dtpke_encrypt(auth.ek, [nk.pid for nk in notaries[:3]], 2, b"x")
    outsider = notaries[4]
    share = dtpke_share_decrypt(auth.dk, outsider.pid, outsider.usk, c)
    assert not dtpke_share_verify(auth.vk, outsider.pid, outsider.uvk, c, share)


def test_randomised_tampering_rejected(five):
    auth, notaries, _, c = five
    nk = notaries[2]
    raw = dtpke_share_decrypt(auth.dk, nk.pid, nk.usk, c).to_bytes()
    rng = gm.Drbg(b"tamper")
    for _ in range(1000):
        pos = rng.randbelow(8 * len(raw))
        mutated = bytearray(raw)
        mutated[pos // 8] ^= 1 << (pos % 8)
        try:
            share = DecryptionShare.from_bytes(bytes(mutated))
        except DecodeError:
            continue
        assert not dtpke_share_verify(auth.vk, nk.pid, nk.uvk, c, share)


def test_extra_invalid_share_is_filtered(five):
    auth, notaries, N, c = five
    good = shares(auth, notaries[:3], c)
    junk = replace(good[0], proof_c=(good[0].proof_c + 1) % gm.Q, pid=notaries[4].pid)
    assert dtpke_combine(auth.ck, N, 3, c, [junk] + good) == b"five notaries"


def test_mutated_body_fails_auth(five):
    auth, notaries, N, c = five
    bad = replace(c, body=bytes([c.body[0] ^ 1]) + c.body[1:])
    with pytest.raises(AuthFailure):
        dtpke_combine(auth.ck, N, 3, bad, shares(auth, notaries[:3], bad))


def test_dynamic_thresholds_share_one_authority():
    auth, notaries = make_authority(8, seed=6)
    pids = [nk.pid for nk in notaries]
    for tp in (2, 5):
        c = dtpke_encrypt(auth.ek, pids, tp, b"dyn")
        assert dtpke_combine(auth.ck, pids, tp, c, shares(auth, notaries[:tp], c)) == b"dyn"
        with pytest.raises(InsufficientShares):
            dtpke_combine(auth.ck, pids, tp, c, shares(auth, notaries[:tp - 1], c))


@pytest.mark.parametrize("n3", [3, 5, 6])
def test_threshold_exactness_exhaustive(n3):
    auth, notaries = make_authority(n3, seed=20 + n3)
    pids = [nk.pid for nk in notaries]
    for set_size in range(1, min(n3, 4) + 1):
        N = pids[:set_size]
        for tp in range(1, set_size + 1):
            c = dtpke_encrypt(auth.ek, N, tp, b"exact")
            all_shares = dict(zip(pids, shares(auth, notaries, c)))
            for subset in small_subsets(pids, n3):
                expect = combine_should_succeed(subset, N, tp)
                try:
                    got = dtpke_combine(auth.ck, N, tp, c, [all_shares[p] for p in subset])
                except InsufficientShares:
                    assert not expect, (n3, set_size, tp, subset)
                else:
                    assert expect and got == b"exact"


@given(st.integers(min_value=1, max_value=6), st.data())
@settings(max_examples=20)
def test_any_tprime_members_recover(n3, data):
    auth, notaries = make_authority(n3, seed=data.draw(st.integers(0, 1000)))
    members = data.draw(st.lists(st.sampled_from(notaries), min_size=1, unique_by=lambda k: k.pid))
    tp = data.draw(st.integers(min_value=1, max_value=len(members)))
    m = data.draw(st.binary(max_size=100))
    c = dtpke_encrypt(auth.ek, [k.pid for k in members], tp, m)
    chosen = data.draw(st.permutations(members))[:tp]
    assert dtpke_combine(auth.ck, [k.pid for k in members], tp, c, shares(auth, chosen, c)) == m
