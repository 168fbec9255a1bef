"""Scaled local time against the limit diffusion, side by side.

Draws l_N(x) from the aggregated branching representation of the walk's
excursion forest and exact samples of the limit diffusion H(x), then
compares quantiles, the atom at zero, and the two-sample KS statistic at
each grid point.
"""

import argparse

import numpy as np

from walklim import analysis, model
from walklim.limit import LimitLaw, sample_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.6)
    ap.add_argument("--N", type=int, default=1000)
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    params = model.params_from_q(args.q)
    law = LimitLaw.from_params(params)
    xs = [0.25, 0.5, 1.0]

    l, _ = analysis.sample_scaled_local_time(params, args.N, xs, args.runs,
                                             seed=args.seed)
    h = sample_path(xs, law, np.random.default_rng(args.seed + 1),
                    n_paths=args.runs)

    crit = analysis.ks_critical_value(0.01, args.runs, args.runs)
    qs = [0.25, 0.5, 0.75, 0.95]
    print(f"q = {args.q}, N = {args.N}, runs = {args.runs}, "
          f"c = {law.c:.4f}\n")
    for k, x in enumerate(xs):
        d = analysis.ks_distance(l[:, k], h[:, k])
        lq = np.quantile(l[:, k], qs)
        hq = np.quantile(h[:, k], qs)
        print(f"x = {x}")
        print(f"  P(=0): walk {np.mean(l[:, k] == 0):.4f}  "
              f"limit {np.mean(h[:, k] == 0):.4f}  "
              f"exact {np.exp(-law.h0 / (law.c * x)):.4f}")
        print("  quantiles  walk:", " ".join(f"{v:.4f}" for v in lq))
        print("  quantiles limit:", " ".join(f"{v:.4f}" for v in hq))
        verdict = "below" if d < crit else "ABOVE"
        print(f"  KS = {d:.4f} ({verdict} the 1% critical value {crit:.4f})\n")


if __name__ == "__main__":
    main()
