"""Deterministic in-process consortium chain.

State changes only through ``tick``, ``register_gid`` and ``submit``, each of
which appends a record to the log; ``replay(genesis, log)`` rebuilds a byte-identical state. The pools
(SSL for signature shares, DSL for decryption shares), the index store and
the KASE search contract are all views over that single ordered log.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from py_arkworks_bls12381 import G1Point

from . import groupmath as gm
from .errors import BadSignature, DecodeError, EmptyPool, Unauthorized, UnknownGroup
from .kase import KaseIndex, KaseParams, Trapdoor, kase_adjust, kase_probe, scope_public
from .primitives import SchnorrSig, sig_sign, sig_verify
from .signature import DetapsSignature


class TxKind(enum.IntEnum):
    SIGN = 1
    COMB = 2
    TRAPDOOR = 3
    RESPONSE = 4
    TRACE_CALL = 5


class Role(enum.Enum):
    COMBINER = "combiner"
    TRACER = "tracer"


# trapdoor and response transactions come from one-time keys
OPEN_KINDS = frozenset({TxKind.TRAPDOOR, TxKind.RESPONSE})


def tx_message(kind: TxKind, payload: bytes, epoch: int) -> bytes:
    return gm.Writer().raw(b"CHAIN-TX").u8(kind).blob(payload).u64(epoch).getvalue()


@dataclass(frozen=True)
class Transaction:
    kind: TxKind
    payload: bytes
    submitter: G1Point
    epoch: int
    sig: SchnorrSig

    @classmethod
    def make(cls, kind: TxKind, payload: bytes, secret: int, epoch: int) -> "Transaction":
        return cls(kind, bytes(payload), gm.g1_mul(secret), epoch,
                   sig_sign(secret, tx_message(kind, payload, epoch)))

    def to_bytes(self) -> bytes:
        return (gm.Writer().u8(self.kind).u64(self.epoch).point(self.submitter)
                .blob(self.payload).raw(self.sig.to_bytes()).getvalue())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Transaction":
        r = gm.Reader(data)
        try:
            kind = TxKind(r.u8())
        except ValueError:
            raise DecodeError("unknown transaction kind") from None
        epoch, submitter, payload = r.u64(), r.g1(), r.blob()
        sig = SchnorrSig.from_bytes(r.raw(SchnorrSig.SIZE))
        r.done()
        return cls(kind, payload, submitter, epoch, sig)


@dataclass(frozen=True)
class TraceCall:
    sigma_digest: bytes
    target: G1Point

    def to_bytes(self) -> bytes:
        return self.sigma_digest + gm.encode(self.target)

    @classmethod
    def from_bytes(cls, data: bytes) -> "TraceCall":
        r = gm.Reader(data)
        call = cls(r.raw(gm.DIGEST_BYTES), r.g1())
        r.done()
        return call


def encode_comb(m: bytes, sigma: DetapsSignature) -> bytes:
    return gm.Writer().blob(m).raw(sigma.to_bytes()).getvalue()


def encode_response(sigma_digest: bytes, ciphertext: bytes) -> bytes:
    return sigma_digest + ciphertext


@dataclass(frozen=True)
class Receipt:
    epoch: int
    position: int


@dataclass(frozen=True)
class Genesis:
    election_seed: bytes
    n3: int
    t_max: int
    kase_params: KaseParams
    signers: tuple          # authorised Tx^Sign submitter keys
    combiners: tuple        # combiner eta keys, also authorised for Tx^Comb
    tracers: int
    requesters: tuple

    def to_bytes(self) -> bytes:
        w = (gm.Writer().blob(self.election_seed).u32(self.n3).u32(self.t_max)
             .blob(self.kase_params.to_bytes()).u32(self.tracers))
        for group in (self.signers, self.combiners, self.requesters):
            w.u32(len(group))
            for p in group:
                w.point(p)
        return w.getvalue()


_TICK, _TX, _GID = 0, 1, 2


@dataclass
class IndexRow:
    gid: bytes
    slot: int
    index: KaseIndex
    sigma_digest: bytes
    epoch: int


@dataclass
class ChainState:
    genesis: Genesis
    epoch: int = 0
    txs: list = field(default_factory=list)             # (Receipt, Transaction)
    index_store: list = field(default_factory=list)     # IndexRow
    gid_registry: dict = field(default_factory=dict)    # gid -> (slot, epoch)
    signatures: dict = field(default_factory=dict)      # sigma digest -> (m, sigma bytes)
    log: list = field(default_factory=list)             # (record type, bytes)
    _pub_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._authorised = {
            TxKind.SIGN: {gm.encode(p) for p in self.genesis.signers},
            TxKind.COMB: {gm.encode(p) for p in self.genesis.combiners},
            TxKind.TRACE_CALL: {gm.encode(p) for p in self.genesis.requesters},
        }

    # -- writes --------------------------------------------------------------

    def tick(self) -> int:
        self.log.append((_TICK, b""))
        self.epoch += 1
        return self.epoch

    def register_gid(self, gid: bytes, slot: int, epoch: int) -> None:
        if not 1 <= slot <= self.genesis.kase_params.capacity:
            raise UnknownGroup(f"slot {slot} outside the registry")
        self.log.append((_GID, gid + slot.to_bytes(4, "big") + epoch.to_bytes(8, "big")))
        self.gid_registry[bytes(gid)] = (slot, epoch)

    def submit(self, tx: Transaction) -> Receipt:
        """Admit ``tx``: check its signature over the current epoch, then authorisation.

        Identical resubmissions are admitted again at a new position;
        deduplication is left to readers.
        """
        if tx.epoch != self.epoch or not sig_verify(tx.submitter, tx_message(tx.kind, tx.payload,
                                                                           self.epoch), tx.sig):
            raise BadSignature(f"{tx.kind.name} transaction signature invalid")
        if tx.kind not in OPEN_KINDS and gm.encode(tx.submitter) not in self._authorised[tx.kind]:
            raise Unauthorized(f"submitter not authorised for {tx.kind.name}")
        if tx.kind == TxKind.COMB:
            self._index_comb(tx.payload)
        elif tx.kind == TxKind.TRACE_CALL:
            TraceCall.from_bytes(tx.payload)
        receipt = Receipt(self.epoch, len(self.txs))
        self.txs.append((receipt, tx))
        self.log.append((_TX, tx.to_bytes()))
        return receipt

    def _index_comb(self, payload: bytes) -> None:
        r = gm.Reader(payload)
        m = r.blob()
        raw = r.raw(r.remaining())
        sigma = DetapsSignature.from_bytes(raw, self.genesis.n3, self.genesis.t_max)
        if sigma.gid not in self.gid_registry:
            raise UnknownGroup(sigma.gid.hex())
        slot, epoch = self.gid_registry[sigma.gid]
        digest = sigma.digest()
        self.signatures.setdefault(digest, (m, raw))
        self.index_store.append(IndexRow(sigma.gid, slot, sigma.index, digest, epoch))

    # -- reads ---------------------------------------------------------------

    def _of_kind(self, kind: TxKind):
        return [(rc, tx) for rc, tx in self.txs if tx.kind == kind]

    def ssl_pull(self, epoch: int, since: int = 0) -> list[bytes]:
        """Tx^Sign payloads admitted up to ``epoch`` at log position >= ``since``."""
        return [tx.payload for rc, tx in self._of_kind(TxKind.SIGN)
                if rc.epoch <= epoch and rc.position >= since]

    def dsl_pull(self, sigma_digest: bytes) -> list[bytes]:
        return [tx.payload[gm.DIGEST_BYTES:] for _, tx in self._of_kind(TxKind.RESPONSE)
                if tx.payload[:gm.DIGEST_BYTES] == sigma_digest]

    def trace_calls(self) -> list[tuple[Receipt, TraceCall]]:
        return [(rc, TraceCall.from_bytes(tx.payload)) for rc, tx in self._of_kind(TxKind.TRACE_CALL)]

    def signature(self, sigma_digest: bytes) -> tuple[bytes, DetapsSignature]:
        m, raw = self.signatures[sigma_digest]
        return m, DetapsSignature.from_bytes(raw, self.genesis.n3, self.genesis.t_max)

    def search_contract(self, td: Trapdoor, scope) -> list[bytes]:
        """sigma digests whose index holds the trapdoor's keyword, over every gid in scope."""
        params = self.genesis.kase_params
        scope = frozenset(scope)
        pub = self._pub_cache.get(scope)
        if pub is None:
            pub = self._pub_cache[scope] = scope_public(params, scope)
        adjusted = {}
        hits = []
        for row in self.index_store:
            if row.slot not in scope:
                continue
            adj = adjusted.get(row.slot)
            if adj is None:
                adj = adjusted[row.slot] = kase_adjust(params, row.slot, scope, td)
            if kase_probe(params, adj, row.index, pub) in row.index.entries:
                hits.append(row.sigma_digest)
        return hits

    def elect_worker(self, role: Role, epoch: int) -> int:
        size = len(self.genesis.combiners) if role is Role.COMBINER else self.genesis.tracers
        if size < 1:
            raise EmptyPool(f"no {role.value} nodes")
        cycle, offset = divmod(epoch, size)
        seed = gm.digest(b"ELECT", self.genesis.election_seed + role.value.encode()
                         + cycle.to_bytes(8, "big"))
        order = list(range(size))
        gm.Drbg(seed).shuffle(order)
        return order[offset]

    # -- serialisation ---------------------------------------------------------

    def to_bytes(self) -> bytes:
        w = gm.Writer().blob(self.genesis.to_bytes()).u64(self.epoch).u32(len(self.txs))
        for rc, tx in self.txs:
            w.u64(rc.epoch).u32(rc.position).blob(tx.to_bytes())
        w.u32(len(self.index_store))
        for row in self.index_store:
            w.raw(row.gid).u32(row.slot).blob(row.index.to_bytes()).raw(row.sigma_digest).u64(row.epoch)
        w.u32(len(self.gid_registry))
        for gid in sorted(self.gid_registry):
            slot, epoch = self.gid_registry[gid]
            w.raw(gid).u32(slot).u64(epoch)
        return w.getvalue()

    def digest(self) -> bytes:
        return gm.digest(b"CHAIN-STATE", self.to_bytes())

    def dump_log(self) -> bytes:
        w = gm.Writer()
        for kind, data in self.log:
            w.u8(kind).blob(data)
        return w.getvalue()


def replay(genesis: Genesis, log) -> ChainState:
    """Re-execute a log (record list or ``dump_log`` bytes) from genesis."""
    if isinstance(log, (bytes, bytearray)):
        r = gm.Reader(bytes(log))
        records = []
        while r.remaining():
            records.append((r.u8(), r.blob()))
    else:
        records = list(log)
    state = ChainState(genesis)
    for kind, data in records:
        if kind == _TICK:
            state.tick()
        elif kind == _TX:
            state.submit(Transaction.from_bytes(data))
        elif kind == _GID:
            state.register_gid(data[:32], int.from_bytes(data[32:36], "big"),
                               int.from_bytes(data[36:44], "big"))
        else:
            raise DecodeError(f"unknown log record {kind}")
    return state


# functional spellings of the contract calls

def submit_tx(state: ChainState, tx: Transaction) -> Receipt:
    return state.submit(tx)


def ssl_pull(state: ChainState, epoch: int) -> list[bytes]:
    return state.ssl_pull(epoch)


def dsl_pull(state: ChainState, sigma_digest: bytes) -> list[bytes]:
    return state.dsl_pull(sigma_digest)


def search_contract(state: ChainState, td: Trapdoor, scope) -> list[bytes]:
    return state.search_contract(td, scope)


def elect_worker(state: ChainState, role: Role, epoch: int) -> int:
    return state.elect_worker(role, epoch)
