"""Desk-scale timing and size tables along the benchmark axes, plus scaling-shape fits.

Each axis varies one parameter around the reference point (n=10, t=5, t'=5,
n3=10, 1 KB, 10 signatures). Expect a few minutes with the default repeat.

    python scripts/bench.py --repeat 3
    python scripts/bench.py --only scaling
"""

import argparse
import dataclasses

from detaps.bench import bench, combine_scaling, r_squared, render_rows, sign_scaling
from detaps.scenario import ScenarioConfig

REFERENCE = ScenarioConfig(n=10, n1=5, n2=5, n3=10, t=5, t_prime=5, notary_set=5,
                           message_size_kb=1, num_signatures=10, seed=1)

AXES = {
    "n": ({"n": [15, 20, 25, 30]}, {}),
    "message_size_kb": ({"message_size_kb": [1, 5, 10]}, {}),
    "num_signatures": ({"num_signatures": [10, 50, 100]}, {}),
    "t": ({"t": [5, 10, 15]}, {"n": 15}),
    "t_prime": ({"t_prime": [5, 10, 15]}, {"n3": 15, "notary_set": 15}),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--only", choices=[*AXES, "scaling"], action="append")
    args = ap.parse_args()
    chosen = args.only or [*AXES, "scaling"]

    for name in chosen:
        if name == "scaling":
            continue
        grid, base = AXES[name]
        rows = bench(dataclasses.replace(REFERENCE, **base), grid, repeat=args.repeat)
        print(f"== varying {name} (mean of {args.repeat})")
        print(render_rows(rows))
        print()

    if "scaling" in chosen:
        combine = combine_scaling((10, 50, 100))
        sign = sign_scaling((1, 5, 10))
        print("== combine time vs pending signatures")
        print(render_rows([{"n4": n, "combine_ms": ms} for n, ms in combine]))
        print(f"R^2 = {r_squared(*zip(*combine)):.4f}\n")
        print("== signer time vs message size")
        print(render_rows([{"kb": kb, "sign_ms": ms} for kb, ms in sign]))
        print(f"R^2 = {r_squared(*zip(*sign)):.4f}")


if __name__ == "__main__":
    main()
