"""Command line: ``detaps run``, ``detaps bench`` and ``detaps log``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .bench import bench, render_rows
from .chainsim import replay
from .errors import ConfigError
from .scenario import ALL_PHASES, Deployment, ScenarioConfig, execute
from .scheme import setup

FIELDS = [f.name for f in dataclasses.fields(ScenarioConfig)]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    for name in FIELDS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None)


def load_config(args) -> ScenarioConfig:
    values = {}
    if args.config is not None:
        values.update(ScenarioConfig.parse_lines(args.config.read_text()))
    for name in FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return ScenarioConfig.from_mapping(values)


def _phases(text: str | None) -> tuple:
    if not text:
        return ALL_PHASES
    phases = tuple(p.strip() for p in text.split(",") if p.strip())
    unknown = set(phases) - set(ALL_PHASES)
    if unknown:
        raise ConfigError(f"unknown phases {sorted(unknown)}")
    return phases


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_run(args) -> int:
    cfg = load_config(args)
    report, _ = execute(cfg, _phases(args.phases))
    for _ in range(args.repeat - 1):
        extra, _ = execute(cfg, _phases(args.phases))
        for k, v in extra.timings_ms.items():
            report.timings_ms[k] += v
    report.timings_ms = {k: v / args.repeat for k, v in report.timings_ms.items()}
    text = report.render() if not args.no_timings else report.kv_text(include_timings=False)
    _emit(text, args.out)
    return 0 if report.passed else 1


def _grid(specs) -> dict:
    grid = {}
    for spec in specs or []:
        if "=" not in spec:
            raise ConfigError(f"grid entry {spec!r} must be name=v1,v2,...")
        name, values = spec.split("=", 1)
        name = name.strip().replace("-", "_")
        if name not in FIELDS:
            raise ConfigError(f"unknown grid parameter {name!r}")
        grid[name] = [ScenarioConfig.from_mapping({name: v}).__dict__[name]
                      for v in values.split(",")]
    return grid


def cmd_bench(args) -> int:
    cfg = load_config(args)
    grid = _grid(args.grid) or {"t": [cfg.t]}
    rows = bench(cfg, grid, repeat=args.repeat, phases=_phases(args.phases))
    _emit(render_rows(rows) + "\n", args.out)
    return 0


def cmd_log_dump(args) -> int:
    cfg = load_config(args)
    report, dep = execute(cfg, _phases(args.phases))
    if dep is None:
        raise ConfigError("log dump needs at least the sign phase")
    args.out.write_bytes(dep.chain.dump_log())
    print(f"chain.digest\t{dep.chain.digest().hex()}")
    print(f"log.records\t{len(dep.chain.log)}")
    return 0 if report.passed else 1


def cmd_log_replay(args) -> int:
    """Rebuild genesis from the same config, replay the file, print the state digest."""
    cfg = load_config(args)
    cfg.validate()
    keys = setup(cfg.n, cfg.n1, cfg.n2, cfg.n3, cfg.t, seed=cfg.seed, groups=cfg.groups)
    state = replay(Deployment(keys, cfg.seed).chain.genesis, args.log.read_bytes())
    print(f"chain.digest\t{state.digest().hex()}")
    print(f"chain.epoch\t{state.epoch}")
    print(f"chain.txs\t{len(state.txs)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detaps", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its report")
    _add_config_flags(run)
    run.add_argument("--phases", help=f"comma list from {','.join(ALL_PHASES)}")
    run.add_argument("--out", type=Path)
    run.add_argument("--repeat", type=int, default=1, help="average wall times over N runs")
    run.add_argument("--no-timings", action="store_true",
                     help="omit wall times, leaving a byte-reproducible report")
    run.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="mean phase timings over a parameter grid")
    _add_config_flags(b)
    b.add_argument("--grid", action="append", metavar="NAME=V1,V2")
    b.add_argument("--repeat", type=int, default=10)
    b.add_argument("--phases")
    b.add_argument("--out", type=Path)
    b.set_defaults(func=cmd_bench)

    lg = sub.add_parser("log", help="dump or replay the chain transaction log")
    lsub = lg.add_subparsers(dest="log_command", required=True)
    dump = lsub.add_parser("dump")
    _add_config_flags(dump)
    dump.add_argument("--phases")
    dump.add_argument("--out", type=Path, required=True)
    dump.set_defaults(func=cmd_log_dump)
    rep = lsub.add_parser("replay")
    _add_config_flags(rep)
    rep.add_argument("log", type=Path)
    rep.set_defaults(func=cmd_log_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
