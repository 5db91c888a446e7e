"""Benchmark grids and scaling-shape measurements.

Absolute numbers are hardware- and backend-specific; what is checked is the
shape: combine time linear in pending signatures, sign time linear in |m|.
"""

from __future__ import annotations

import dataclasses
import itertools
import statistics
import time
from typing import Sequence

from . import groupmath as gm
from .chainsim import Transaction, TxKind
from .scenario import ALL_PHASES, ScenarioConfig, execute
from .scheme import derive_gid, setup, sign


def bench(base: ScenarioConfig, grid: dict, repeat: int = 10,
          phases: Sequence[str] = ALL_PHASES) -> list[dict]:
    """Mean per-phase wall time for every cell of ``grid`` (name -> values)."""
    names = list(grid)
    rows = []
    for values in itertools.product(*(grid[k] for k in names)):
        cfg = dataclasses.replace(base, **dict(zip(names, values)))
        samples, sizes = {}, {}
        for _ in range(repeat):
            report, _ = execute(cfg, phases)
            for phase, ms in report.timings_ms.items():
                samples.setdefault(phase, []).append(ms)
            sizes = {k: v for k, v in report.values.items() if k.startswith("bytes.")}
        row = dict(zip(names, values))
        row.update({f"{p}_ms": statistics.fmean(v) for p, v in samples.items()})
        row.update(sizes)
        rows.append(row)
    return rows


def render_rows(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_fmt(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _fmt(v) -> str:
    return f"{v:.2f}" if isinstance(v, float) else str(v)


def r_squared(xs: Sequence[float], ys: Sequence[float]) -> float:
    return statistics.correlation(xs, ys) ** 2


def combine_scaling(n4_values=(10, 50, 100), repeat: int = 1, **overrides) -> list[tuple]:
    """(n4, combine ms) pairs: one combiner pass over n4 pending signatures."""
    base = dataclasses.replace(ScenarioConfig(), **overrides)
    out = []
    for n4 in n4_values:
        cfg = dataclasses.replace(base, num_signatures=n4)
        best = min(execute(cfg, ("setup", "sign", "combine"))[0].timings_ms["combine"]
                   for _ in range(repeat))
        out.append((n4, best))
    return out


def sign_scaling(sizes_kb=(1, 5, 10), calls: int = 100, rounds: int = 7,
                 seed: int = 1) -> list[tuple]:
    """(KB, ms per signer action) pairs, one share plus its Tx^Sign envelope.

    The per-KB cost is small next to the fixed group operations, so each
    size takes the minimum over several interleaved rounds of batched calls.
    Every call signs a fresh message: the signing nonce is derived from the
    message, and reusing one message per size would pin a size-specific
    scalar-multiplication cost onto that size. Each batch replays the same
    encryption randomness for the same reason.
    """
    keys = setup(10, 5, 5, 10, 5, seed=seed)
    pk = keys.pk
    gid = derive_gid(pk, pk.groups[0], 1)
    S = list(range(1, 6))
    N = [nk.pid for nk in keys.notaries[:5]]
    rng = gm.Drbg(seed)
    msgs = {kb: [rng.random_bytes(kb * 1024) for _ in range(calls)] for kb in sizes_kb}
    secret = keys.signer_tx_keys[0].secret
    best = {kb: float("inf") for kb in sizes_kb}
    for r in range(rounds):
        for kb in sizes_kb:
            coins = gm.Drbg(gm.digest(b"SIGN-BENCH", r.to_bytes(4, "big")))
            start = time.perf_counter()
            for m in msgs[kb]:
                ct = sign(pk, keys.signer_keys[0], m, S, N, gid, pk.enclave_keys[0], rng=coins)
                Transaction.make(TxKind.SIGN, ct.to_bytes(), secret, 1)
            per_call = (time.perf_counter() - start) * 1000 / calls
            best[kb] = min(best[kb], per_call)
    return [(kb, best[kb]) for kb in sizes_kb]
