"""Two parameter probes behind the convexity checks.

1. Bridge weight: the smallest b for which mu_n >= 0 holds at every n.
   The first failure is always mu_1, which depends on the increments from
   log 2 to log 3 only, so the cutoff does not depend on gamma.
2. Convexity weight: for each gamma, the smallest C0 (by doubling from 2)
   at which the quadratic form sigma_n sigma_{n+1} - 4 lambda_n^2 stays
   non-negative, for several R0.

    python3 scripts/probe_thresholds.py [--nmax 100000]
"""

import argparse
import math

import numpy as np
from scipy.optimize import brentq

from discrete_hardy.convexity import GAMMA_THRESHOLD, check_bridge, coeff_row, sweep_c0
from discrete_hardy.weights import BridgeWeight


def bridge_cutoff() -> float:
    return brentq(lambda b: coeff_row(BridgeWeight(1.0, b), 0.0, 1).mu, 0.51, 0.99, xtol=1e-14)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nmax", type=int, default=100_000)
    args = ap.parse_args()

    b_num = bridge_cutoff()
    b_closed = math.log(4 / 3) / math.log(math.log(3) / math.log(2))
    print(f"bridge cutoff b*: numeric {b_num:.12f}, closed form {b_closed:.12f}")
    for b in (0.51, 0.6, round(b_closed - 1e-3, 4), round(b_closed + 1e-3, 4), 0.75):
        rep = check_bridge(1.0, b, args.nmax)
        print(f"  b = {b:<7} mu_min = {rep.constants['mu_min']:+.4e}  {'pass' if rep.passed else 'FAIL'}")

    print(f"\nquadratic form, threshold gamma = {GAMMA_THRESHOLD:.4f}")
    tgrid = np.linspace(0, 1, 11)
    for gamma in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
        cells = []
        for r0 in (4.0, 16.0, 64.0):
            s = sweep_c0(gamma, r0, tgrid, args.nmax, max_doublings=8)
            cells.append(f"R0={r0:>4g}: C0={s.c0 if s.passed else '>512':>5}")
        print(f"  gamma = {gamma:<4}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
