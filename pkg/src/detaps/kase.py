"""Key-aggregate searchable encryption over an asymmetric pairing.

Groups ("documents") are small integer slots 1..n. Setup publishes the
power ladder g^(alpha^k) in G1 for k in 0..2n except n+1, and
g2^(alpha^i) in G2 for i in 0..n. An aggregate key for a slot set S is
sum_{j in S} gamma * g_{n+1-j}; a trapdoor adds the keyword hash; the
public Adjust step shifts it to a particular slot without any secret.

Index entries are digests of the GT value
    e(H(w), g2)^tau / e(g_1, g2_n)^tau
bound to c1, so they can be stored and compared as plain bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from py_arkworks_bls12381 import G1Point, G2Point

from . import groupmath as gm
from .errors import BadCapacity, OutOfRange, OutOfScope, TooManyPids

DUMMY_PREFIX = b"\xffKASE-DUMMY"


@dataclass(frozen=True)
class KaseParams:
    capacity: int
    ladder_g1: dict          # k -> g^(alpha^k), k in {0..2n} \ {n+1}
    ladder_g2: tuple         # g2^(alpha^i), i = 0..n

    @property
    def B(self) -> dict:
        return self.ladder_g1

    def g1_power(self, k: int) -> G1Point:
        return self.ladder_g1[k]

    def to_bytes(self) -> bytes:
        w = gm.Writer().u32(self.capacity)
        for k in sorted(self.ladder_g1):
            w.u32(k).point(self.ladder_g1[k])
        for p in self.ladder_g2:
            w.point(p)
        return w.getvalue()


@dataclass(frozen=True)
class MasterPublicKey:
    v: G2Point


@dataclass(frozen=True)
class AggregateKey:
    k_a: G1Point
    scope: frozenset


@dataclass(frozen=True)
class Trapdoor:
    td: G1Point

    def to_bytes(self) -> bytes:
        return gm.encode(self.td)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Trapdoor":
        return cls(gm.decode_g1(data))


@dataclass(frozen=True)
class AdjustedTrapdoor:
    point: G1Point
    slot: int
    scope: frozenset


@dataclass(frozen=True)
class KaseIndex:
    c1: G2Point
    c2: G2Point
    entries: tuple

    def to_bytes(self) -> bytes:
        w = gm.Writer().point(self.c1).point(self.c2).u32(len(self.entries))
        for e in self.entries:
            w.raw(e)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, max_entries: int = 4096) -> "KaseIndex":
        r = gm.Reader(data)
        c1, c2 = r.g2(), r.g2()
        entries = tuple(r.raw(gm.DIGEST_BYTES) for _ in range(r.count(max_entries)))
        r.done()
        return cls(c1, c2, entries)

    def digest(self) -> bytes:
        return gm.digest(b"KASE-INDEX", self.to_bytes())


def kase_setup(capacity: int, rng=None) -> KaseParams:
    if capacity < 1:
        raise BadCapacity(f"capacity must be >= 1, got {capacity}")
    alpha = gm.as_rng(rng).scalar()
    n = capacity
    ladder_g1, power = {}, 1
    for k in range(0, 2 * n + 1):
        if k != n + 1:
            ladder_g1[k] = gm.g1_mul(power)
        power = power * alpha % gm.Q
    ladder_g2 = tuple(gm.g2_mul(pow(alpha, i, gm.Q)) for i in range(n + 1))
    return KaseParams(n, ladder_g1, ladder_g2)


def kase_keygen(rng=None) -> tuple[MasterPublicKey, int]:
    gamma = gm.as_rng(rng).scalar()
    return MasterPublicKey(gm.g2_mul(gamma)), gamma


def _check_slots(params: KaseParams, slots: Iterable[int]) -> frozenset:
    scope = frozenset(slots)
    bad = [s for s in scope if not 1 <= s <= params.capacity]
    if bad:
        raise OutOfRange(f"slots {sorted(bad)} outside [1, {params.capacity}]")
    return scope


def kase_extract(params: KaseParams, msk: int, scope: Iterable[int]) -> AggregateKey:
    scope = _check_slots(params, scope)
    if not scope:
        raise OutOfRange("aggregate scope must be non-empty")
    n = params.capacity
    k_a = gm.g1_mul(msk, gm.g1_sum(params.g1_power(n + 1 - j) for j in scope))
    return AggregateKey(k_a, scope)


def keyword_hash(keyword: bytes) -> G1Point:
    return gm.hash_to_g1(b"KASE-KEYWORD", keyword)


def _entry(c1: G2Point, gt_value) -> bytes:
    return gm.digest(b"KASE-ENTRY", gm.encode(c1) + gm.encode(gt_value))


def kase_encrypt_with_coins(params: KaseParams, mpk: MasterPublicKey, slot: int,
                            keywords: Sequence[bytes], size: int,
                            rng=None) -> tuple[KaseIndex, int]:
    """Index ``keywords`` under ``slot``, padded with dummies to ``size`` entries."""
    _check_slots(params, [slot])
    keywords = list(dict.fromkeys(bytes(k) for k in keywords))
    if len(keywords) > size:
        raise TooManyPids(f"{len(keywords)} keywords exceed index size {size}")
    rng = gm.as_rng(rng)
    tau = rng.scalar()
    n = params.capacity
    c1 = gm.g2_mul(tau)
    c2 = gm.g2_mul(tau, mpk.v + params.ladder_g2[slot])
    mask = -gm.g1_mul(tau, params.g1_power(1))
    g2_n = params.ladder_g2[n]
    words = keywords + [DUMMY_PREFIX + rng.random_bytes(16) for _ in range(size - len(keywords))]
    entries = [_entry(c1, gm.multi_pair([gm.g1_mul(tau, keyword_hash(w)), mask], [gm.G2_GEN, g2_n]))
               for w in words]
    rng.shuffle(entries)
    return KaseIndex(c1, c2, tuple(entries)), tau


def kase_encrypt(params: KaseParams, mpk: MasterPublicKey, slot: int,
                 keywords: Sequence[bytes], size: int, rng=None) -> KaseIndex:
    return kase_encrypt_with_coins(params, mpk, slot, keywords, size, rng)[0]


def kase_trapdoor(k_a: AggregateKey, keyword: bytes) -> Trapdoor:
    return Trapdoor(k_a.k_a + keyword_hash(keyword))


def kase_adjust(params: KaseParams, slot: int, scope: Iterable[int],
                td: Trapdoor) -> AdjustedTrapdoor:
    scope = _check_slots(params, scope)
    if slot not in scope:
        raise OutOfScope(f"slot {slot} is not in the aggregate scope")
    n = params.capacity
    shift = gm.g1_sum(params.g1_power(n + 1 - j + slot) for j in scope if j != slot)
    return AdjustedTrapdoor(td.td + shift, slot, scope)


def scope_public(params: KaseParams, scope: Iterable[int]) -> G1Point:
    n = params.capacity
    return gm.g1_sum(params.g1_power(n + 1 - j) for j in scope)


def kase_probe(params: KaseParams, adjusted: AdjustedTrapdoor, index: KaseIndex,
               pub: G1Point | None = None) -> bytes:
    """The entry value this trapdoor would match in ``index``."""
    if pub is None:
        pub = scope_public(params, adjusted.scope)
    return _entry(index.c1, gm.multi_pair([adjusted.point, -pub], [index.c1, index.c2]))


def kase_test(params: KaseParams, adjusted: AdjustedTrapdoor, index: KaseIndex,
              entry: bytes) -> bool:
    try:
        return kase_probe(params, adjusted, index) == entry
    except Exception:
        return False


def kase_match(params: KaseParams, adjusted: AdjustedTrapdoor, index: KaseIndex,
               pub: G1Point | None = None) -> bool:
    try:
        return kase_probe(params, adjusted, index, pub) in index.entries
    except Exception:
        return False
