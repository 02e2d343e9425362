"""Write CSV series behind the qualitative inventory/rate figures.

For one OU signal path (and for a steep deterministic signal) the adaptive,
no-signal and temporary-only laws are run side by side; one CSV per scenario
with columns t, I, and X/u for each law.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from adaptive_liquidation.cli import write_columns
from adaptive_liquidation.controller import FeedbackLaw, reference_strategies
from adaptive_liquidation.model import REFERENCE_PARAMS
from adaptive_liquidation.signals import REFERENCE_SIGNAL, DeterministicSignal, OUSignal, SignalPath, make_grid
from adaptive_liquidation.simulator import simulate_closed_loop


def scenario(params, signal, path: SignalPath) -> dict[str, np.ndarray]:
    laws = [FeedbackLaw.build(params, signal), *reference_strategies(params, signal)]
    cols = {"t": path.grid, "I": path.rate}
    for law in laws:
        tr = simulate_closed_loop(law, path, eval_params=params)
        cols[f"X_{law.name}"] = tr.X
        cols[f"u_{law.name}"] = tr.u
    return cols


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("figure_data"))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()
    p = REFERENCE_PARAMS
    grid = make_grid(p.horizon, args.steps)

    ou = OUSignal(REFERENCE_SIGNAL)
    write_columns(args.out / "ou_path.csv", scenario(p, ou, SignalPath.from_rates(grid, ou.rates(grid, 1, args.seed)[0])))
    zero = DeterministicSignal.constant(0.0)
    write_columns(args.out / "zero_signal.csv", scenario(p, zero, SignalPath.from_rates(grid, np.zeros(grid.size))))
    ramp = DeterministicSignal(lambda t: np.asarray(t, dtype=float))
    write_columns(args.out / "increasing_signal.csv", scenario(p, ramp, SignalPath.from_rates(grid, ramp.rates(grid)[0])))
    print(f"wrote {sorted(f.name for f in args.out.glob('*.csv'))} to {args.out}")


if __name__ == "__main__":
    main()
