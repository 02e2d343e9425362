"""Closed form vs discrete oracle as the grid is refined; prints observed orders."""

from __future__ import annotations

import argparse

import numpy as np

from adaptive_liquidation.model import REFERENCE_PARAMS
from adaptive_liquidation.oracle import DiscreteProblem, discretized_closed_form, fbsde_residual, solve_foc
from adaptive_liquidation.signals import DeterministicSignal
from adaptive_liquidation.verify import closed_form_on_grid, relative_l2


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--signal", choices=["zero", "ou-mean"], default="zero")
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800, 1600])
    args = ap.parse_args()
    p = REFERENCE_PARAMS
    signal = None if args.signal == "zero" else DeterministicSignal.exponential(1.0, 0.1)

    print(f"{'N':>6} {'rel L2(u)':>12} {'order':>6} {'cost gap':>10} {'du':>10} {'dZ':>10}")
    prev = None
    for n in args.sizes:
        prob = DiscreteProblem.from_signal(p, n, signal)
        sol = solve_foc(prob)
        law, _, tr = closed_form_on_grid(p, signal, n)
        u_cf = discretized_closed_form(tr)
        err = relative_l2(u_cf, sol.u_star, prob.dt)
        gap = abs(prob.cost(u_cf) - sol.cost) / abs(sol.cost)
        res = fbsde_residual(tr, law).normalized()
        order = f"{np.log2(prev / err):6.2f}" if prev else " " * 6
        print(f"{n:6d} {err:12.3e} {order} {gap:10.2e} {res['du']:10.2e} {res['dZ']:10.2e}")
        prev = err


if __name__ == "__main__":
    main()
