"""Lifted candidates for the periodic Schroedinger models, with a box-size check.

    python3 scripts/schrodinger_runs.py
"""

import argparse

from specgap.fem import get_problem
from specgap.method import run_method


def lifted(name, x_max, h):
    rep = run_method(get_problem(name, x_max=x_max), h_n=h)
    return rep, sorted(e.z.real for e in rep.lifted() if e.z.real < 2.5)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--h", type=float, default=0.3125)
    args = ap.parse_args()

    for name, boxes in (("schrodinger-line", (40.0, 80.0)), ("schrodinger-halfline", (60.0, 120.0))):
        for x in boxes:
            rep, vals = lifted(name, x, args.h)
            a, b = rep.gap
            print(f"{name} X={x:g} dim={rep.fine_dim} first gap ({a}, {b})")
            print("  lifted below 2.5: " + ", ".join(f"{v:.5f}" for v in vals))
            print("  in the first gap: " + ", ".join(f"{e.z.real:.5f}" for e in rep.lifted_in_gap()))


if __name__ == "__main__":
    main()
