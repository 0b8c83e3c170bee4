"""Exact finite-N variance of catalog linear statistics as N grows,
next to the limiting forms int s alpha'^2 ds and int alpha'^2 ds."""

import argparse

from annulus_rmt.kernel import KernelEvaluator
from annulus_rmt.params import ModelParams
from annulus_rmt.stats import CATALOG, variance_functional_exact, variance_limit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Q", type=float, default=1.0)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--N", type=int, nargs="+", default=[25, 50, 100, 200, 400])
    args = ap.parse_args()
    for name, stat in CATALOG.items():
        p = ModelParams(args.N[0], args.Q, args.q)
        print(f"{name}: limit {variance_limit(stat, p):.6f}, printed form {variance_limit(stat, p, form='printed'):.6f}")
        for N in args.N:
            v = variance_functional_exact(stat, KernelEvaluator(ModelParams(N, args.Q, args.q)))
            print(f"  N = {N:4d}  Var A = {v:.6f}")


if __name__ == "__main__":
    main()
