"""Galerkin and perturbed distances to lambda_1^+ for the block operator.

    python3 scripts/block_convergence.py            # rows h = 1/2, 1/4, 1/8 (about 15 s)
    python3 scripts/block_convergence.py --slow     # adds h = 1/16 (dimension 4096, a few minutes)
"""

import argparse
import time

from specgap.fem import exact_block_eigs, get_problem
from specgap.method import convergence_row, fit_loglog_slope


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--slow", action="store_true", help="include the h = 1/16 row")
    ap.add_argument("--refine", type=int, default=7, help="fine mesh is h / 2^refine")
    args = ap.parse_args()

    prob = get_problem("block")
    lam = exact_block_eigs(1)[1]
    ns = [2, 4, 8, 16] if args.slow else [2, 4, 8]
    print(f"lambda_1^+ = {lam!r}")
    print("h,fine_dim,galerkin_dist,perturbed_dist,seconds")
    rows = []
    for n in ns:
        start = time.perf_counter()
        row = convergence_row(prob, lam, 1 / n, args.refine)
        rows.append(row)
        print(f"1/{n},{row.fine_dim},{row.galerkin_dist:.15f},{row.perturbed_dist:.15f},"
              f"{time.perf_counter() - start:.1f}")
    hs = [r.h for r in rows]
    g, _ = fit_loglog_slope(hs, [r.galerkin_dist for r in rows])
    p, used = fit_loglog_slope(hs, [r.perturbed_dist for r in rows])
    print(f"# slopes: galerkin {g:.3f}, perturbed {p:.3f} (rows used: {used.tolist()})")


if __name__ == "__main__":
    main()
