#!/usr/bin/env python3
"""Learn a sparse target with the noise rate hidden, sweeping a grid below the bound.

    python3 scripts/eta_sweep_demo.py --eta 0.07 --eta-bound 0.1 --steps 50 --seeds 10
"""

import argparse
import time

from lpn_sparsity import (GammaSpec, build_psi_table, cheat_band_approximator,
                          learn_sparse_pipeline, make_field, planted_oracle,
                          sample_sparse_linear)
from lpn_sparsity.errors import LearningFailed
from lpn_sparsity.seeding import derive_seed, make_rng


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--eta", type=float, default=0.07)
    p.add_argument("--eta-bound", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--seeds", type=int, default=10)
    args = p.parse_args()

    gamma, ctx = GammaSpec("affine", 2.0), make_field(2)
    A = cheat_band_approximator(gamma, "exact")
    table = build_psi_table(A, gamma, ctx, args.n, args.eta_bound, 1 / (16 * args.n), 0.025, 0,
                            fast=True)
    wins = 0
    t0 = time.perf_counter()
    for s in range(args.seeds):
        f = sample_sparse_linear(ctx, args.n, args.d, make_rng(derive_seed(s, "demo")))
        o = planted_oracle(f, args.eta, args.eta_bound, s)
        try:
            h = learn_sparse_pipeline(A, gamma, ctx, args.n, o, 0.1, s, m=args.d, fast=True,
                                      table=table, sweep=True, grid_steps=args.steps)
        except LearningFailed as e:
            print(f"seed {s}: {e}")
            continue
        wins += h == f
        print(f"seed {s}: {'ok' if h == f else 'wrong'}  examples {o.examples_used}")
    print(f"{wins}/{args.seeds} recovered in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
