"""Sampled and analytic verdicts for the Q = [[1, 1], [1, q]] family around the threshold."""
import argparse

import numpy as np

from contractionkit.certificates import (
    SweepSpec,
    example1_analytic_verdict,
    example1_Q,
    example1_threshold,
    sup_mu_over_domain,
)
from contractionkit.lognorm import Weight
from contractionkit.models import example1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--k1", type=float, default=1.0)
    ap.add_argument("--k2", type=float, default=1.0)
    ap.add_argument("--S_Y", type=float, default=1.0)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--x-max", type=float, default=10.0)
    args = ap.parse_args()

    sys = example1(args.S_Y, args.k1, args.k2, args.delta, 1.0)
    q_star = example1_threshold(args.delta, args.k1)
    spec = SweepSpec((args.count, args.count), ((0.0, args.x_max), (0.0, args.S_Y)))
    print(f"threshold q* = {q_star:.6g}")
    print(f"{'q':>8} {'sampled mu_sup':>16} {'sampled':>8} {'analytic':>8}")
    for q in np.round(np.linspace(1.0 + 0.05, q_star + 0.5, 12), 4):
        mu, _ = sup_mu_over_domain(sys, Weight.from_Q(example1_Q(q)), spec)
        av = example1_analytic_verdict(q, args.S_Y, args.k1, args.k2, args.delta)
        print(f"{q:8.4f} {mu:16.6g} {'pass' if mu < 0 else 'fail':>8} {'pass' if av.passed else 'fail':>8}")


if __name__ == "__main__":
    main()
