"""Eigenvalues of A + iB for random 3x3 A, B with sigma(A) = {-1, 0, 2}, sigma(B) = {-s, 0, s}.

Writes one CSV per s with the eigenvalue dots and their membership flags,
plus the boundary curves of the gap regions, ready for plotting.

    python3 scripts/enclosure_figures.py --out figs/
"""

import argparse
import csv
from pathlib import Path

from specgap.geometry import RegionParams, SpectrumModel, curve_samples
from specgap.lab import enclosure_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="enclosure_out")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--s", type=float, nargs="+", default=[0.25, 0.5, 1.0, 1.25, 3.0, 4.0])
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec_a = SpectrumModel.from_values([-1, 0, 2])
    for s in args.s:
        spec_b = SpectrumModel.from_values([-s, 0, s])
        rep = enclosure_trial(spec_a, spec_b, args.trials, args.seed)
        with open(out / f"eigs_s{s:g}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial", "re", "im", "in_x", "in_y"])
            for r in rep.records:
                w.writerow([r.trial, repr(r.z.real), repr(r.z.imag), r.in_x, r.in_y])
        with open(out / f"curves_s{s:g}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["gap", "t", "f_re", "f_im", "g_re", "g_im"])
            for a, b in spec_a.gaps():
                t, f, g = curve_samples(RegionParams(a, b, -s, s), 201)
                for row in zip(t, f, g):
                    w.writerow([f"{a:g}:{b:g}", repr(row[0]), repr(row[1].real), repr(row[1].imag),
                                repr(row[2].real), repr(row[2].imag)])
        print(f"s={s:g}: {len(rep.records)} eigenvalues, {rep.violations} outside X_A and Y_B")


if __name__ == "__main__":
    main()
