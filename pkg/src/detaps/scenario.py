"""Actors on the simulated chain, and the full-lifecycle scenario runner."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import groupmath as gm
from .chainsim import (ChainState, Genesis, Role, TraceCall, Transaction, TxKind, encode_comb,
                       encode_response)
from .errors import ConfigError, InsufficientShares, SigInvalid, ValidationFailed
from .primitives import Scheme, keygen
from .scheme import (SystemKeys, combine, derive_gid, notary_share_response, notary_trapdoor,
                     open_trace_result, setup, sign, trace, verify)

# Table 4 of the experiments; values outside are allowed but flagged
PAPER_RANGES = {
    "n": (10, 50), "n3": (10, 50), "n1": (5, 5), "n2": (5, 5),
    "num_signatures": (100, 1000), "message_size_kb": (1, 10),
}
PAPER_THRESHOLDS = {5, 10, 15}


@dataclass
class ScenarioConfig:
    n: int = 10
    n1: int = 5
    n2: int = 5
    n3: int = 10
    t: int = 5
    t_prime: int = 3
    notary_set: int = 5
    message_size_kb: float = 1.0
    num_signatures: int = 10
    seed: int = 1
    epochs: int = 1
    groups: int = 4

    def validate(self) -> list[str]:
        """Raise ConfigError on impossible values; return out-of-range notes."""
        if not 1 <= self.t <= self.n:
            raise ConfigError(f"t={self.t} outside [1, n={self.n}]")
        if not 1 <= self.t_prime:
            raise ConfigError("t' must be at least 1")
        if self.t_prime > self.notary_set:
            raise ConfigError(f"t'={self.t_prime} exceeds |N|={self.notary_set}")
        if self.notary_set > self.n3:
            raise ConfigError(f"|N|={self.notary_set} exceeds n3={self.n3}")
        if min(self.n1, self.n2, self.epochs, self.groups) < 1 or self.num_signatures < 0:
            raise ConfigError("n1, n2, epochs and groups must be positive")
        if self.message_size_kb < 0:
            raise ConfigError("message size must be non-negative")
        notes = []
        for name, (lo, hi) in PAPER_RANGES.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                notes.append(f"{name}={v} outside [{lo}, {hi}]")
        for name in ("t", "t_prime"):
            if getattr(self, name) not in PAPER_THRESHOLDS:
                notes.append(f"{name}={getattr(self, name)} not in {sorted(PAPER_THRESHOLDS)}")
        return notes

    @classmethod
    def from_mapping(cls, values: dict) -> "ScenarioConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name == "t'":
                name = "t_prime"
            if name not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            kind = float if fields[name].type in (float, "float") else int
            try:
                kwargs[name] = kind(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return cls(**kwargs)

    @staticmethod
    def parse_lines(text: str) -> dict:
        out = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
        return out


# -- actors ------------------------------------------------------------------

def notary_respond(keys: SystemKeys, notary_pos: int, chain: ChainState,
                   calls: Sequence[tuple], rng=None) -> int:
    """One notary's pass over pending trace calls; returns responses posted.

    ``calls`` holds (call epoch, TraceCall). The notary submits one trapdoor
    per signing epoch involved, lets the search contract find its indexes,
    and answers only the traced signatures it actually appears in. A bad eta
    raises SigInvalid before any share is produced.
    """
    rng = gm.as_rng(rng)
    pk, notary, k_a = keys.pk, keys.notaries[notary_pos], keys.aggregate_key
    wanted = {}
    for call_epoch, call in calls:
        if call.sigma_digest in chain.signatures:
            wanted.setdefault(call.sigma_digest, (call_epoch, call))
    by_epoch = {}
    for digest in wanted:
        _, sigma = chain.signature(digest)
        by_epoch.setdefault(chain.gid_registry[sigma.gid][1], []).append(digest)
    posted = 0
    for epoch, digests in sorted(by_epoch.items()):
        td = notary_trapdoor(notary, k_a, epoch)
        chain.submit(Transaction.make(TxKind.TRAPDOOR, td.to_bytes(), rng.scalar(), chain.epoch))
        hits = set(chain.search_contract(td, k_a.scope))
        for digest in digests:
            if digest not in hits:
                continue
            call_epoch, _ = wanted[digest]
            m, sigma = chain.signature(digest)
            tracer = chain.elect_worker(Role.TRACER, call_epoch)
            ct = notary_share_response(pk, notary, m, sigma, pk.enclave_keys[tracer], rng)
            chain.submit(Transaction.make(TxKind.RESPONSE, encode_response(digest, ct.to_bytes()),
                                          rng.scalar(), chain.epoch))
            posted += 1
    return posted


class Deployment:
    """A SystemKeys instance wired to a chain, with host-side bookkeeping."""

    def __init__(self, keys: SystemKeys, seed=None):
        self.keys = keys
        self.pk = keys.pk
        self.rng = gm.Drbg(gm.digest(b"ACTORS", repr(seed).encode()))
        genesis = Genesis(
            election_seed=gm.digest(b"ELECTION-SEED", repr(seed).encode()),
            n3=self.pk.n3, t_max=self.pk.t_max, kase_params=self.pk.kase_params,
            signers=tuple(k.public for k in keys.signer_tx_keys),
            combiners=tuple(k.public for k in keys.combiner_keys),
            tracers=len(keys.tracers),
            requesters=tuple(k.public for k in keys.requester_keys),
        )
        self.chain = ChainState(genesis)
        self.cursors = [0] * len(keys.combiners)

    def tick(self) -> int:
        epoch = self.chain.tick()
        for group in self.pk.groups:
            gid = derive_gid(self.pk, group, epoch)
            self.chain.register_gid(gid, *self.pk.gid_registry[gid])
        return epoch

    def gid(self, group_pos: int, epoch: int | None = None) -> bytes:
        epoch = self.chain.epoch if epoch is None else epoch
        return derive_gid(self.pk, self.pk.groups[group_pos], epoch)

    def submit_share(self, signer: int, m: bytes, S, N, gid: bytes, t_prime=None) -> Transaction:
        j = self.chain.elect_worker(Role.COMBINER, self.pk.epoch_of(gid))
        ct = sign(self.pk, self.keys.signer_keys[signer - 1], m, S, N, gid,
                  self.pk.enclave_keys[j], t_prime, self.rng)
        tx = Transaction.make(TxKind.SIGN, ct.to_bytes(), self.keys.signer_tx_keys[signer - 1].secret,
                              self.chain.epoch)
        self.chain.submit(tx)
        return tx

    def run_combiners(self) -> list:
        """Every combiner host feeds its enclave the SSL entries it has not seen yet."""
        emitted = []
        for j, enclave in enumerate(self.keys.combiners):
            batch = self.chain.ssl_pull(self.chain.epoch, since=self.cursors[j])
            self.cursors[j] = len(self.chain.txs)
            if not batch:
                continue
            for m, sigma in combine(self.pk, enclave, self.keys.combiner_keys[j], batch,
                                    self.chain.epoch):
                tx = Transaction.make(TxKind.COMB, encode_comb(m, sigma),
                                      self.keys.combiner_keys[j].secret, self.chain.epoch)
                self.chain.submit(tx)
                emitted.append((m, sigma, tx))
        return emitted

    def request_trace(self, sigma_digest: bytes, target, requester: int = 0) -> TraceCall:
        call = TraceCall(sigma_digest, target)
        tx = Transaction.make(TxKind.TRACE_CALL, call.to_bytes(),
                              self.keys.requester_keys[requester].secret, self.chain.epoch)
        self.chain.submit(tx)
        return call

    def pending_calls(self) -> list:
        return [(rc.epoch, call) for rc, call in self.chain.trace_calls()]

    def run_notaries(self, calls=None, only: Iterable[int] | None = None) -> dict:
        calls = self.pending_calls() if calls is None else calls
        positions = range(len(self.keys.notaries)) if only is None else only
        outcome = {}
        for pos in positions:
            try:
                outcome[pos] = notary_respond(self.keys, pos, self.chain, calls, self.rng)
            except SigInvalid:
                outcome[pos] = "fail"
        return outcome

    def run_tracer(self, call_epoch: int, call: TraceCall):
        j = self.chain.elect_worker(Role.TRACER, call_epoch)
        m, sigma = self.chain.signature(call.sigma_digest)
        responses = self.chain.dsl_pull(call.sigma_digest)
        return trace(self.pk, self.keys.tracers[j], m, sigma, responses, call.target)


# -- reports -----------------------------------------------------------------

@dataclass
class RunReport:
    values: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def records(self, include_timings: bool = True) -> list[tuple[str, str]]:
        rows = [(k, str(v)) for k, v in self.values.items()]
        rows += [(f"check.{k}", "pass" if v else "FAIL") for k, v in self.checks.items()]
        rows += [(f"note.{i}", v) for i, v in enumerate(self.notes)]
        if include_timings:
            rows += [(f"time_ms.{k}", f"{v:.3f}") for k, v in self.timings_ms.items()]
        return rows

    def kv_text(self, include_timings: bool = True) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in self.records(include_timings))

    def table(self) -> str:
        phases = [(k, f"{v:.1f}") for k, v in self.timings_ms.items()]
        sizes = [(k[len("bytes."):], str(v)) for k, v in self.values.items() if k.startswith("bytes.")]
        lines = []
        for title, rows in (("phase", phases), ("message", sizes)):
            if not rows:
                continue
            width = max(len(title), *(len(r[0]) for r in rows))
            unit = "ms" if title == "phase" else "bytes"
            lines.append(f"{title:<{width}}  {unit:>10}")
            lines.append("-" * (width + 12))
            lines += [f"{k:<{width}}  {v:>10}" for k, v in rows]
            lines.append("")
        return "\n".join(lines)

    def render(self) -> str:
        return self.kv_text() + "\n" + self.table()


class _Timer:
    def __init__(self, report: RunReport, phase: str):
        self.report, self.phase = report, phase

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        elapsed = (time.perf_counter() - self.start) * 1000
        self.report.timings_ms[self.phase] = self.report.timings_ms.get(self.phase, 0.0) + elapsed
        return False


ALL_PHASES = ("setup", "sign", "combine", "verify", "trace")


def run_scenario(config: ScenarioConfig, phases: Sequence[str] = ALL_PHASES) -> RunReport:
    """Full lifecycle on the simulator. Later phases imply the earlier ones they need."""
    return execute(config, phases)[0]


def execute(config: ScenarioConfig, phases: Sequence[str] = ALL_PHASES):
    """``run_scenario`` that also hands back the Deployment (None for setup only)."""
    report = RunReport(notes=config.validate())
    phases = set(phases)
    unknown = phases - set(ALL_PHASES)
    if unknown:
        raise ConfigError(f"unknown phases {sorted(unknown)}")
    for k, v in dataclasses.asdict(config).items():
        report.values[f"config.{k}"] = v

    with _Timer(report, "setup"):
        keys = setup(config.n, config.n1, config.n2, config.n3, config.t, seed=config.seed,
                     groups=config.groups)
    report.values["bytes.public_key"] = len(keys.pk.to_bytes())
    if phases <= {"setup"}:
        return report, None

    dep = Deployment(keys, config.seed)
    rng = gm.Drbg(gm.digest(b"SCENARIO", repr(config.seed).encode()))
    msg_len = int(round(config.message_size_kb * 1024))
    pids = [nk.pid for nk in keys.notaries]
    jobs = []
    for k in range(config.num_signatures):
        S = tuple(sorted(rng.sample(range(1, config.n + 1), config.t)))
        N = tuple(sorted(rng.sample(pids, config.notary_set)))
        jobs.append(dict(m=rng.random_bytes(msg_len), S=S, N=N, group=k % config.groups,
                         epoch=1 + k % config.epochs))

    produced = []
    sign_sizes, comb_sizes, sigma_sizes = set(), set(), set()
    for epoch in range(1, config.epochs + 1):
        dep.tick()
        with _Timer(report, "sign"):
            for job in jobs:
                if job["epoch"] != epoch:
                    continue
                job["gid"] = dep.gid(job["group"])
                for i in job["S"]:
                    tx = dep.submit_share(i, job["m"], job["S"], job["N"], job["gid"],
                                          config.t_prime)
                    sign_sizes.add(len(tx.payload))
        if "combine" in phases or phases & {"verify", "trace"}:
            with _Timer(report, "combine"):
                for m, sigma, tx in dep.run_combiners():
                    produced.append((m, sigma))
                    comb_sizes.add(len(tx.payload))
                    sigma_sizes.add(len(sigma.to_bytes()))

    report.values["count.shares"] = sum(len(j["S"]) for j in jobs)
    report.values["count.signatures"] = len(produced)
    report.values["bytes.tx_sign"] = _one(sign_sizes)
    report.values["bytes.tx_comb"] = _one(comb_sizes)
    report.values["bytes.signature"] = _one(sigma_sizes)
    report.checks["sign_size_constant"] = len(sign_sizes) <= 1
    if not phases & {"combine", "verify", "trace"}:
        return report, dep
    report.checks["all_signatures_emitted"] = len(produced) == config.num_signatures
    report.checks["signature_size_constant"] = len(sigma_sizes) <= 1

    expected = {(j["m"], j["gid"]): frozenset(j["S"]) for j in jobs}
    if phases & {"verify", "trace"}:
        with _Timer(report, "verify"):
            ok = [verify(keys.pk, m, sigma) for m, sigma in produced]
        report.checks["verify"] = all(ok)
        report.values["count.verified"] = sum(ok)

    if "trace" in phases:
        target = keygen(Scheme.PKE, seed=b"trace-target-" + repr(config.seed).encode())
        with _Timer(report, "trace"):
            dep.tick()
            for _, sigma in produced:
                dep.request_trace(sigma.digest(), target.public)
            calls = dep.pending_calls()
            dep.run_notaries(calls)
            traced, out_sizes = 0, set()
            for (call_epoch, call), (m, sigma) in zip(calls, produced):
                try:
                    sealed = dep.run_tracer(call_epoch, call)
                except (InsufficientShares, ValidationFailed):
                    continue
                if sealed is None:
                    continue
                out_sizes.add(len(sealed.to_bytes()))
                S = open_trace_result(keys.pk, target.secret, sigma, sealed)
                traced += S == expected[(m, sigma.gid)]
        report.values["count.traced"] = traced
        report.checks["trace"] = traced == len(produced)
        responses = [tx for _, tx in dep.chain.txs if tx.kind == TxKind.RESPONSE]
        trapdoors = [tx for _, tx in dep.chain.txs if tx.kind == TxKind.TRAPDOOR]
        calls_tx = [tx for _, tx in dep.chain.txs if tx.kind == TxKind.TRACE_CALL]
        report.values["count.responses"] = len(responses)
        report.values["bytes.tx_trapdoor"] = _one({len(t.payload) for t in trapdoors})
        report.values["bytes.tx_response"] = _one({len(t.payload) for t in responses})
        report.values["bytes.tx_trace_call"] = _one({len(t.payload) for t in calls_tx})
        report.values["bytes.trace_output"] = _one(out_sizes)

    report.values["chain.digest"] = dep.chain.digest().hex()
    return report, dep


def _one(sizes: set):
    if not sizes:
        return 0
    return min(sizes) if len(sizes) == 1 else "/".join(str(s) for s in sorted(sizes))
