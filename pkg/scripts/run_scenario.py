"""Run the canonical smoke scenario (or a config file) and print its report.

    python scripts/run_scenario.py
    python scripts/run_scenario.py --config my.cfg --seed 7
"""

import argparse
import sys

from detaps.scenario import ScenarioConfig, run_scenario

CANONICAL = dict(n=10, t=5, t_prime=3, n3=10, message_size_kb=1, num_signatures=10, seed=1)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="key=value file overriding the canonical values")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    values = dict(CANONICAL)
    if args.config:
        with open(args.config) as fh:
            values.update(ScenarioConfig.parse_lines(fh.read()))
    if args.seed is not None:
        values["seed"] = args.seed
    report = run_scenario(ScenarioConfig.from_mapping(values))
    print(report.render())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
