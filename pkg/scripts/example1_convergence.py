"""Sup error of the synthesized line-load field against both closed forms as p grows.

The outgoing form converges like 1/p; the standing-wave form does not.
"""

import argparse

import numpy as np

from surfwave import flat
from surfwave import synthesis as syn
from surfwave.materials import MaterialPoint


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, nargs="+", default=[10.0, 20.0, 40.0])
    ap.add_argument("--t", type=float, default=10.0)
    args = ap.parse_args()
    m = MaterialPoint(1.0, 1.0, 1.0)
    x1 = np.linspace(-3, 3, 61)
    x1 = x1[np.abs(x1) >= 1.0]
    print("p,outgoing_error,standing_error")
    for p in args.p:
        f = syn.inhomogeneous_field(flat.example1_source(p, T=args.t), args.t, (x1, np.array([0.0])), m).f[:, 0]
        out = flat.example1_outgoing(args.t, x1, 1.0, p, m)
        lit = flat.example1_closed_form(args.t, x1, 1.0, p, m)
        e_out = np.max(np.abs(f - out)) / np.max(np.abs(out))
        e_lit = np.max(np.abs(f - lit)) / np.max(np.abs(lit))
        print(f"{p:g},{e_out:.4e},{e_lit:.4e}")


if __name__ == "__main__":
    main()
