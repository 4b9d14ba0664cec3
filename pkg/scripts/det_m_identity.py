"""Compare det M against S and the radical factor on random interface pairs."""

import argparse

import numpy as np

from surfwave import dispersion as disp
from surfwave.verify import random_material


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    times, over = [], []
    for _ in range(args.n):
        p, q = random_material(rng), random_material(rng)
        s = rng.uniform(0.02, 0.98) * min(p.cs, q.cs)
        det = float(np.real(np.linalg.det(disp.stoneley_matrix(s, (p, q)).m)))
        S, fac = disp.stoneley_residual(s, (p, q)), disp.stoneley_det_factor(s, (p, q))
        times.append(abs(det - fac * S) / max(abs(det), abs(fac * S)))
        over.append(abs(det * fac - S) / max(abs(S), abs(det * fac)))
    print(f"max relative gap, det M = factor * S : {max(times):.3e}")
    print(f"max relative gap, det M * factor = S : {max(over):.3e}")


if __name__ == "__main__":
    main()
