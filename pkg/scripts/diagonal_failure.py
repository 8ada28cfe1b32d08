"""Sampled sup of mu_2 under Q = diag(1, r) for example1, on a truncated and a wide x-window."""
import argparse

import numpy as np

from contractionkit.certificates import SweepSpec, sup_mu_over_domain
from contractionkit.lognorm import Weight
from contractionkit.models import example1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r-min", type=float, default=0.1)
    ap.add_argument("--r-max", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--wide", type=float, default=100.0, help="x upper bound of the wide window")
    args = ap.parse_args()

    sys = example1()
    narrow = SweepSpec((100, 100), ((0.0, 10.0), (0.0, 1.0)))
    wide = SweepSpec((400, 100), ((0.0, args.wide), (0.0, 1.0)))
    print(f"{'r':>8} {'x<=10':>12} {'argmax':>16} {f'x<={args.wide:g}':>12} {'argmax':>16}")
    for r in np.linspace(args.r_min, args.r_max, args.points):
        w = Weight.from_Q(np.diag([1.0, r]))
        m1, p1 = sup_mu_over_domain(sys, w, narrow)
        m2, p2 = sup_mu_over_domain(sys, w, wide)
        print(f"{r:8.3f} {m1:+12.4g} {str(np.round(p1, 2)):>16} {m2:+12.4g} {str(np.round(p2, 2)):>16}")


if __name__ == "__main__":
    main()
