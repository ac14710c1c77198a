#!/usr/bin/env python3
"""How often the k - d shift indices avoid every relevant variable.

Compares the measured rate with the product bound and with 1 - k^2/n.

    python3 scripts/shift_rate.py --d 2 --k 4 --n 200 --trials 20000
"""

import argparse

from lpn_sparsity import make_field, sample_sparse_linear
from lpn_sparsity.full_learner import draw_shift_indices, shift_success_bound
from lpn_sparsity.seeding import derive_seed, make_rng


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    ctx = make_field(args.q)
    clean = 0
    for t in range(args.trials):
        rng = make_rng(derive_seed(args.seed, "shift-rate", t))
        f = sample_sparse_linear(ctx, args.n, args.d, rng)
        idx = draw_shift_indices(args.n, args.k - args.d, rng)
        clean += not set(idx) & set(f.support.tolist())
    print(f"measured   {clean / args.trials:.4f}  ({clean}/{args.trials})")
    print(f"product    {shift_success_bound(args.d, args.k, args.n):.4f}")
    print(f"1 - k^2/n  {1 - args.k ** 2 / args.n:.4f}")


if __name__ == "__main__":
    main()
