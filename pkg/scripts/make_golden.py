"""Regenerate tests/golden/vectors.json from the seeded cases in tests/golden_cases.py."""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from golden_cases import compute_vectors  # noqa: E402


def main() -> None:
    path = ROOT / "tests" / "golden" / "vectors.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(compute_vectors(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
