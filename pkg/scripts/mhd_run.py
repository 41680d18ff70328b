"""Perturbation run for the MHD model: tau of the lifted candidates and the band clusters.

    python3 scripts/mhd_run.py                   # h = 1/64, fine 1/1024 (about 45 s)
    python3 scripts/mhd_run.py --h 1/32 --refine 3
"""

import argparse
from fractions import Fraction

import numpy as np

from specgap.fem import get_problem
from specgap.method import band_clusters, run_method


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--h", default="1/64")
    ap.add_argument("--refine", type=int, default=4)
    ap.add_argument("--spacing", type=float, default=0.02, help="cluster spacing for the band report")
    args = ap.parse_args()

    rep = run_method(get_problem("mhd"), float(Fraction(args.h)), args.refine)
    print(f"fine dimension {rep.fine_dim}, gap {rep.gap}")
    for e in rep.lifted_in_gap():
        print(f"lifted in gap: z = {e.z.real:.6f}{e.z.imag:+.6f}i, tau = {e.tau.real:.6f}")
    taus = [e.tau.real for e in rep.lifted() if e.z.real < 1.0]
    print("lifted tau clusters:")
    for lo, hi, n in band_clusters(taus, args.spacing):
        print(f"  [{lo:.4f}, {hi:.4f}]  {n} points")
    gal = rep.galerkin
    a, b = rep.gap
    print(f"plain Galerkin points inside the gap: {int(np.sum((gal > a) & (gal < b)))}")


if __name__ == "__main__":
    main()
