"""Regenerate the stereographic eigenvalue plot: n = N = 20, M = 10,
1000 replicas, with the annulus boundary circles.

    python scripts/figure1.py --seed 1 --out figure1

writes figure1.csv and figure1.svg.
"""

import argparse
import sys

from annulus_rmt.cli import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--replicas", type=int, default=1000)
    ap.add_argument("--out", default="figure1")
    args = ap.parse_args()
    common = ["figure", "--M", "10", "--N-cols", "20", "--n", "20",
              "--replicas", str(args.replicas), "--seed", str(args.seed)]
    for fmt in ("csv", "svg"):
        code = run(common + ["--format", fmt, "--out", f"{args.out}.{fmt}"])
        if code:
            sys.exit(code)
    print(f"wrote {args.out}.csv and {args.out}.svg")


if __name__ == "__main__":
    main()
