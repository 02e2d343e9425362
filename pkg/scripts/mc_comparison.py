"""Monte Carlo comparison of the adaptive, no-signal and temporary-only laws under the OU signal,
plus the adaptive law against bounded perturbations of itself."""

from __future__ import annotations

import argparse

import numpy as np

from adaptive_liquidation.controller import FeedbackLaw, reference_strategies
from adaptive_liquidation.model import REFERENCE_PARAMS
from adaptive_liquidation.oracle import smooth_direction_functions
from adaptive_liquidation.signals import REFERENCE_SIGNAL, OUSignal, make_grid
from adaptive_liquidation.simulator import compare_strategies


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--perturbations", type=int, default=20)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.1])
    args = ap.parse_args()
    p, signal = REFERENCE_PARAMS, OUSignal(REFERENCE_SIGNAL)
    grid = make_grid(p.horizon, args.steps)

    adaptive = FeedbackLaw.build(p, signal)
    laws = [adaptive, *reference_strategies(p, signal)]
    for eps in args.eps:
        laws += [adaptive.perturbed(a, eps, f"eps={eps:g}#{j}")
                 for j, a in enumerate(smooth_direction_functions(p.horizon, args.perturbations, args.seed))]
    s = compare_strategies(laws, signal, args.paths, args.seed, grid, eval_params=p)
    z = s.z_scores()
    print(f"{'strategy':>16} {'mean':>12} {'se':>9} {'diff':>11} {'z':>7}")
    for r, zz in zip(s.rows(), z):
        print(f"{r['strategy']:>16} {r['mean_cost']:12.5f} {r['stderr']:9.5f} {r['diff_vs_first']:11.5f} {zz:7.1f}")
    worse = np.array(z[1:]) < -3
    print(f"adaptive ahead beyond 3 SE in {worse.sum()} of {worse.size} comparisons")


if __name__ == "__main__":
    main()
