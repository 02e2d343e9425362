"""Command-line entry point: solve | simulate | verify | sweep | plot-script.

Exit codes: 0 success, 1 verification failure, 2 assumption violation,
3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .controller import FeedbackLaw, fundamental_solution, optimal_trajectory_deterministic, reference_strategies
from .model import AssumptionViolated, ModelError, check_assumption, sweep_assumption
from .signals import SignalPath, make_grid
from .simulator import compare_strategies, full_cost_mc, simulate_closed_loop
from .verify import run_all

EXIT_OK, EXIT_VERIFY, EXIT_ASSUMPTION, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2, which is reserved here
        raise UsageError(message)


def fmt(x) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_columns(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    write_csv(path, names, zip(*(np.asarray(columns[n], dtype=float) for n in names)))


def read_columns(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return {name: np.array([float(r[k]) for r in rows[1:]]) for k, name in enumerate(rows[0])}


def _write_text(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _require_assumption(cfg: RunConfig):
    chk = check_assumption(cfg.model)
    if not chk.holds:
        raise AssumptionViolated(f"min |G3 S44 - G4 S43| = {chk.min_gap:.3e} at tau = {chk.tau_at_min:g}")
    return chk


# --------------------------------------------------------------------------
# commands


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    signal = cfg.signal.deterministic()
    chk = _require_assumption(cfg)
    p = cfg.model
    law = FeedbackLaw.build(p, signal)
    grid = make_grid(p.horizon, cfg.grid.n_steps)
    fund = fundamental_solution(grid, law.coeffs, p)
    traj = optimal_trajectory_deterministic(law, fund, signal=signal)
    write_columns(out / "trajectory.csv", traj.columns())
    summary = dict(traj.costs.as_dict(), min_gap=chk.min_gap, tau_at_min_gap=chk.tau_at_min,
                   X_T=float(traj.X[-1]), n_steps=float(cfg.grid.n_steps))
    write_csv(out / "summary.csv", ["quantity", "value"], ((k, float(v)) for k, v in summary.items()))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    _require_assumption(cfg)
    p = cfg.model
    signal = cfg.signal.build()
    grid = make_grid(p.horizon, cfg.grid.n_steps)
    adaptive = FeedbackLaw.build(p, signal)
    no_signal, temp_only = reference_strategies(p, signal, cfg.mc.kappa_small)
    laws = [adaptive, no_signal, temp_only]
    summary = compare_strategies(laws, signal, cfg.mc.n_paths, cfg.mc.seed, grid, eval_params=p)
    write_csv(out / "mc_summary.csv",
              ["strategy", "mean_cost", "stderr", "n_paths", "diff_vs_adaptive", "diff_stderr"],
              ([r["strategy"], r["mean_cost"], r["stderr"], r["n_paths"], r["diff_vs_first"], r["diff_stderr"]]
               for r in summary.rows()))
    n_files = min(cfg.mc.max_path_files, cfg.mc.n_paths)
    for j in range(n_files):
        path = SignalPath.from_rates(grid, signal.rates(grid, 1, cfg.mc.seed, start=j)[0])
        for law in laws:
            traj = simulate_closed_loop(law, path, eval_params=p)
            write_columns(out / f"path_{j:03d}_{law.name}.csv", traj.columns())
    lines = [f"paths: {summary.n_paths}  seed: {cfg.mc.seed}  steps: {cfg.grid.n_steps}",
             "ranking: " + " > ".join(summary.ranking)]
    for r, z in zip(summary.rows(), summary.z_scores()):
        lines.append(f"{r['strategy']:>15s}  mean {r['mean_cost']:.6f}  se {r['stderr']:.6f}  "
                     f"paired diff vs adaptive {r['diff_vs_first']:.6f} (z = {z:.1f})")
    if cfg.mc.martingale_vol > 0 and cfg.mc.n_paths >= 2:
        rep = full_cost_mc(adaptive, signal, cfg.mc.n_paths, cfg.mc.seed, grid, cfg.mc.martingale_vol, cfg.mc.p0,
                           eval_params=p)
        lines.append(f"full cost - x P0: {rep.mean_full_minus_xp0:.6f}  reduced: {rep.mean_reduced:.6f}  "
                     f"diff {rep.diff_mean:.3e} +- {rep.diff_stderr:.3e} ({'ok' if rep.consistent else 'MISMATCH'})")
    _write_text(out / "mc_report.txt", lines)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    results = run_all(cfg.model, cfg.signal.mean_path(), cfg.grid.n_steps, cfg.oracle.n_steps,
                      cfg.sweep.grid_n)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    _write_text(out / "verify_report.txt", lines)
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_sweep(cfg: RunConfig, out: Path, lo=None, hi=None, samples=None, seed=None) -> int:
    lo = cfg.sweep.lo if lo is None else lo
    hi = cfg.sweep.hi if hi is None else hi
    samples = cfg.sweep.samples if samples is None else samples
    seed = cfg.mc.seed if seed is None else seed
    if samples < 0:
        raise UsageError("samples must be >= 0")
    lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if lo_a.shape != (7,) or hi_a.shape != (7,) or np.any(lo_a < 0) or np.any(hi_a < lo_a) or np.any(hi_a <= 0):
        raise UsageError("box needs 7 components with 0 <= lo <= hi and hi > 0")
    rep = sweep_assumption(lo_a, hi_a, samples, seed, cfg.sweep.grid_n)
    write_csv(out / "sweep_failures.csv",
              ["lambda", "gamma", "kappa", "rho", "varrho", "phi", "horizon", "min_gap"],
              (list(xi) + [gap] for xi, gap in rep.failures))
    lines = [f"box lo: {' '.join(fmt(v) for v in lo_a)}", f"box hi: {' '.join(fmt(v) for v in hi_a)}",
             f"samples: {samples}  seed: {seed}  grid: {cfg.sweep.grid_n}",
             f"failures: {rep.n_failures}",
             f"smallest gap: {rep.min_gap if samples else float('nan'):.6g}"]
    _write_text(out / "sweep_report.txt", lines)
    print("\n".join(lines))
    return EXIT_OK if rep.n_failures == 0 else EXIT_ASSUMPTION


GNUPLOT = """\
# gnuplot script generated by adaptive-liquidation; run from this directory with `gnuplot plot.gp`
set datafile separator ","
set terminal pngcairo size 1000,700
set key autotitle columnhead
set xlabel "t"

set output "inventory.png"
set multiplot layout 2,1
set ylabel "X"
plot {inventory}
set ylabel "u"
plot {rates}
unset multiplot
"""


def cmd_plot_script(cfg: RunConfig, out: Path) -> int:
    files = sorted(out.glob("trajectory.csv")) + sorted(out.glob("path_000_*.csv"))
    if not files:
        raise UsageError(f"no trajectory CSVs in {out}; run solve or simulate first")
    inv = ", ".join(f'"{f.name}" using "t":"X" with lines title "{f.stem}"' for f in files)
    rates = ", ".join(f'"{f.name}" using "t":"u" with lines title "{f.stem}"' for f in files)
    _write_text(out / "plot.gp", GNUPLOT.format(inventory=inv, rates=rates).rstrip("\n").split("\n"))
    return EXIT_OK


# --------------------------------------------------------------------------


def _floats(text: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in text.split(","))
    if len(vals) == 1:
        return vals * 7
    if len(vals) != 7:
        raise argparse.ArgumentTypeError("give one value or seven comma-separated values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration (default: the reference setup)")
    common.add_argument("--out", type=Path, help="output directory (overrides [output].directory)")
    common.add_argument("--seed", type=int, help="RNG seed override")
    common.add_argument("--paths", type=int, help="number of Monte Carlo paths override")
    parser = _Parser(prog="adaptive-liquidation", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="closed-form trajectory for a deterministic signal")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo comparison of the three strategies")
    sub.add_parser("verify", parents=[common], help="run the invariant and oracle checks")
    sw = sub.add_parser("sweep", parents=[common], help="sample parameter tuples and test the invertibility condition")
    sw.add_argument("--lo", type=_floats, help="lower box corner (one value or seven)")
    sw.add_argument("--hi", type=_floats, help="upper box corner (one value or seven)")
    sw.add_argument("--samples", type=int, help="number of sampled tuples")
    sub.add_parser("plot-script", parents=[common], help="write a gnuplot script for the CSVs in --out")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    mc = cfg.mc
    if args.seed is not None:
        if args.seed < 0:
            raise UsageError("--seed must be >= 0")
        mc = replace(mc, seed=args.seed)
    if args.paths is not None:
        if args.paths < 1:
            raise UsageError("--paths must be >= 1")
        mc = replace(mc, n_paths=args.paths)
    return replace(cfg, mc=mc)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _apply_overrides(load_config(args.config), args)
        out = args.out if args.out is not None else cfg.output.directory
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.lo, args.hi, args.samples, args.seed)
        return cmd_plot_script(cfg, out)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssumptionViolated as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION


if __name__ == "__main__":
    sys.exit(main())
