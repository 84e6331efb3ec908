"""Regenerate the oracle-certified random instances of the bundled corpus."""

from __future__ import annotations

import argparse
from pathlib import Path

from qsolve.constraint import to_text
from qsolve.oracle import certified_closed

DEFAULT_DIR = Path(__file__).resolve().parent.parent / "src" / "qsolve" / "corpus"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--count", type=int, default=60)
    ap.add_argument("--out", type=Path, default=DEFAULT_DIR)
    args = ap.parse_args()
    for old in args.out.glob("random_*.qs"):
        old.unlink()
    for i, (phi, verdict) in enumerate(certified_closed(args.seed, args.count)):
        path = args.out / f"random_{i:03d}.qs"
        path.write_text(
            f"# expect: {'true' if verdict else 'false'}\n"
            f"# oracle-certified, seed {args.seed}\n"
            f"{to_text(phi)}\n"
        )
    print(f"wrote {args.count} instances to {args.out}")


if __name__ == "__main__":
    main()
