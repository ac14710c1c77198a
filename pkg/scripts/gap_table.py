#!/usr/bin/env python3
"""Print a Psi' table and the gap sparsity k found from each start m.

    python3 scripts/gap_table.py --n 16 --q 2 --mode midpoint
"""

import argparse
import math

from lpn_sparsity import GammaSpec, build_psi_table, cheat_band_approximator, clamp_to_delta
from lpn_sparsity import find_gap_k, make_field
from lpn_sparsity.errors import ContractViolation


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--gamma", default="affine:2")
    p.add_argument("--mode", default="midpoint",
                   choices=["exact", "midpoint", "low", "high", "uniform"])
    p.add_argument("--eta-bound", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    gamma = GammaSpec.parse(args.gamma)
    ctx = make_field(args.q)
    A = clamp_to_delta(cheat_band_approximator(gamma, args.mode), gamma)
    h = 1 / (16 * args.n)
    fast = args.mode != "uniform"
    table = build_psi_table(A, gamma, ctx, args.n, args.eta_bound, h, 0.05, args.seed, fast=fast)

    print("d  psi'(d)")
    for d in range(1, args.n + 1):
        print(f"{d:<3}{table.psi(d):.4f}")
    print("\nm  k")
    for m in range(1, math.floor(gamma.max_m(args.n) + 1e-6) + 1):
        try:
            print(f"{m:<3}{find_gap_k(table, m, args.q == 2)}")
        except ContractViolation as e:
            print(f"{m:<3}none ({e})")


if __name__ == "__main__":
    main()
