"""Exact log partition function against its large-N form.

Prints, for each N, the exact value, the residual of the asymptotic form
with its -1/(12S) constant and the residual without it.
"""

import argparse

from annulus_rmt.params import ModelParams
from annulus_rmt.plasma import free_energy_asymptotic, log_partition_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Q", type=float, default=1.0)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--N", type=int, nargs="+", default=[10, 20, 40, 80, 160, 320, 640])
    args = ap.parse_args()
    print(f"{'N':>6} {'log Z':>18} {'residual':>12} {'without 1/12S':>14}")
    for N in args.N:
        p = ModelParams(N, args.Q, args.q)
        exact = log_partition_exact(p)
        r = exact - free_energy_asymptotic(p)
        r0 = exact - free_energy_asymptotic(p, include_constant=False)
        print(f"{N:6d} {exact:18.10f} {r:12.3e} {r0:14.6f}")


if __name__ == "__main__":
    main()
