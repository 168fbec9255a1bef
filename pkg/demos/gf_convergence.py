"""Deterministic convergence of the exact transform F_N to Phi.

Prints the convergence table of F_N (both start types) toward the limit
transform Phi(x, lambda) = exp(-h0 lambda / (1 + c lambda x)), together
with the A_N/B_N diagnostics whose limits are lambda*x*c and whose scaled
difference N(B_N - A_N) tends to lambda*c.

The type-1 column converges to Phi.  The type-2 column converges to Phi
squared: a type-2 start carries one extra deterministic child, which
doubles the limiting exponent.
"""

import argparse

from walklim import analysis, model


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.6)
    ap.add_argument("--x", type=float, default=1.0)
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args()

    params = model.params_from_q(args.q)
    rows = analysis.convergence_table(params, [10, 100, 1000, 10_000, 100_000],
                                      args.x, args.lam)
    phi = rows[0].Phi
    print(f"q = {args.q}, x = {args.x}, lambda = {args.lam}")
    print(f"Phi = {phi:.12f}   Phi^2 = {phi**2:.12f}\n")
    print(f"{'N':>7} {'F1':>14} {'F2':>14} {'|F1-Phi|':>10} "
          f"{'|F2-Phi^2|':>10} {'A_N':>9} {'B_N':>9} {'N(B-A)':>9}")
    for r in rows:
        print(f"{r.N:>7} {r.F1:>14.10f} {r.F2:>14.10f} {r.gap1:>10.2e} "
              f"{abs(r.F2 - phi**2):>10.2e} {r.A_N:>9.6f} {r.B_N:>9.6f} "
              f"{r.n_gap:>9.6f}")

    c = 2.0 / params.sigma2
    print(f"\ndiagnostic limits: A, B -> {args.lam * args.x * c:.6f}, "
          f"N(B-A) -> {args.lam * c:.6f}")


if __name__ == "__main__":
    main()
