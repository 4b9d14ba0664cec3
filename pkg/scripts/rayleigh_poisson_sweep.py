"""Tabulate c_R / c_s and the surface axis ratio against Poisson's ratio."""

import argparse
import csv
import sys

import numpy as np

from surfwave import dispersion as disp
from surfwave import synthesis as syn
from surfwave.materials import EllipticPoint, MaterialPoint


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=25, help="number of Poisson ratios in (0, 0.5)")
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["poisson", "c_R_over_c_s", "axis_ratio"])
    for nu in np.linspace(0.0, 0.49, args.n):
        m = MaterialPoint(1.0, 2.0 * nu / (1.0 - 2.0 * nu) + 1e-12, 1.0)
        c = disp.rayleigh_speed(m).c_R
        p = syn.rayleigh_polarization(EllipticPoint(0.0, (0, 0), c, (1.0, 0.0)), 1.0, m).p
        w.writerow([f"{nu:.4f}", f"{c / m.cs:.12f}", f"{abs(p[2]) / abs(p[0]):.12f}"])


if __name__ == "__main__":
    main()
