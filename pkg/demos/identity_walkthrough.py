"""Walk one excursion through the branching correspondence.

Simulates a single excursion of the reflected (1,2) walk, extracts the
level-crossing counts (U1, U2), and prints the exact local-time identity
L(j) = U1(j-1) + U1(j) + U2(j) level by level.
"""

import argparse

import numpy as np

from walklim import model, walk


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.6)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--min-height", type=int, default=4,
                    help="resample until the excursion reaches this height")
    args = ap.parse_args()

    params = model.params_from_q(args.q)
    rng = np.random.default_rng(args.seed)
    exc = walk.simulate_excursion(params, rng)
    while exc.max_height < args.min_height:
        exc = walk.simulate_excursion(params, rng)

    print(f"q = {args.q}, excursion length {exc.length}, "
          f"max height {exc.max_height}")
    if exc.length <= 60:
        print("path:", " ".join(str(int(s)) for s in exc.steps))

    U = walk.extract_branching(exc)
    print(f"\n{'j':>3} {'L(j)':>6} {'U1(j-1)':>8} {'U1(j)':>7} {'U2(j)':>7}")
    for j in range(1, exc.max_height + 1):
        lt = walk.local_time([exc], j)
        u1_prev = int(U[j - 1, 0])
        u1 = int(U[j, 0]) if j < len(U) else 0
        u2 = int(U[j, 1]) if j < len(U) else 0
        flag = "" if lt == u1_prev + u1 + u2 else "  MISMATCH"
        print(f"{j:>3} {lt:>6} {u1_prev:>8} {u1:>7} {u2:>7}{flag}")

    ok = walk.verify_identity_all_levels(exc)
    print("\nidentity holds at every level:", ok)


if __name__ == "__main__":
    main()
