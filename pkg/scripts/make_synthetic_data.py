#!/usr/bin/env python3
"""Write a synthetic blocks/stale/propagation/hashrate dataset.

    python3 scripts/make_synthetic_data.py --out data/synth --periods 3
"""

import argparse
import sys

from forkcast.synthetic import write_dataset


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True)
    ap.add_argument("--periods", type=int, default=3)
    ap.add_argument("--seed", type=int, default=20230102)
    args = ap.parse_args()
    paths = write_dataset(args.out, periods=args.periods, seed=args.seed)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
