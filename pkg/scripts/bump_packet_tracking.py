"""Track a Rayleigh packet through a shear-modulus bump and compare with its central ray."""

import argparse

import numpy as np

from surfwave import rays
from surfwave import synthesis as syn
from surfwave.materials import Bump, MaterialField, MaterialPoint


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.2)
    ap.add_argument("--n", type=int, default=96, help="covector grid size per axis")
    args = ap.parse_args()
    f = MaterialField(MaterialPoint(1.0, 1.0, 1.0), (Bump("mu", args.amplitude, (-1.0, 1.0), 2.0),))
    pk = syn.WavePacketData.gaussian((20.0, 0.0), 2.0, n=args.n)
    ax = (np.linspace(-2.8, 0.8, 28), np.linspace(-1.5, 1.5, 24))
    ray = rays.trace_ray((0.0, 0.0), (20.0, 0.0), 2.0, 0.01, f)
    print("t,packet_x1,packet_x2,ray_x1,ray_x2")
    for t, k in ((0.0, 0), (1.0, 100), (2.0, 200)):
        c = syn.packet_center(syn.cauchy_field(pk, t, ax, f, chart_n=10, dt=0.04))
        print(f"{t:g},{c[0]:.6f},{c[1]:.6f},{ray.x[k, 0]:.6f},{ray.x[k, 1]:.6f}")


if __name__ == "__main__":
    main()
