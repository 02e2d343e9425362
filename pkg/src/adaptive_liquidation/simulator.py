"""Closed-loop simulation of inventory, distortion and cost, plus Monte Carlo comparisons.

Discretisation (shared with the variational oracle, which imports it):

* the rate u_i is held constant on [t_i, t_{i+1});
* X_{i+1} = X_i - u_i dt_i and Y follows its exact exponential kernel;
* every integral is trapezoidal in the state, including the signal gain
  sum (X_i + X_{i+1})/2 dA_i: X_{i+1} is fixed once u_i is chosen at t_i, so
  the integrand stays predictable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import ModelParams
from .signals import SignalPath, path_rng, trapezoid_increments, validate_grid


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CostComponents:
    signal_gain: np.ndarray | float
    transient_cost: np.ndarray | float
    temporary_cost: np.ndarray | float
    running_penalty: np.ndarray | float
    terminal_penalty: np.ndarray | float

    @property
    def total(self):
        return (self.signal_gain - self.transient_cost - self.temporary_cost
                - self.running_penalty - self.terminal_penalty)

    def as_dict(self) -> dict[str, float]:
        return {
            "signal_gain": float(self.signal_gain),
            "transient_cost": float(self.transient_cost),
            "temporary_cost": float(self.temporary_cost),
            "running_penalty": float(self.running_penalty),
            "terminal_penalty": float(self.terminal_penalty),
            "reduced_cost": float(self.total),
        }


def transient_decay(grid: np.ndarray, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-step factors (exp(-rho dt), (1 - exp(-rho dt)) / rho)."""
    dt = np.diff(grid)
    return np.exp(-rho * dt), -np.expm1(-rho * dt) / rho


def running_weights(grid: np.ndarray) -> np.ndarray:
    """Node weights of the trapezoid rule used for the running penalty."""
    dt = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def cost_components(grid, X, Y, u_steps, dA, params: ModelParams) -> CostComponents:
    """Discrete reduced functional; X, Y on nodes (..., N+1), u_steps and dA on steps (..., N)."""
    dt = np.diff(grid)
    return CostComponents(
        signal_gain=np.sum(0.5 * (X[..., :-1] + X[..., 1:]) * dA, axis=-1),
        transient_cost=params.kappa * np.sum(u_steps * dt * 0.5 * (Y[..., :-1] + Y[..., 1:]), axis=-1),
        temporary_cost=params.lambda_temp * np.sum(u_steps**2 * dt, axis=-1),
        running_penalty=params.phi * np.sum(0.5 * dt * (X[..., :-1] ** 2 + X[..., 1:] ** 2), axis=-1),
        terminal_penalty=params.varrho * X[..., -1] ** 2,
    )


def terminal_rate(X, Y, params: ModelParams):
    """u_T = varrho X_T / lambda - kappa Y_T / (2 lambda)."""
    return params.varrho * X / params.lambda_temp - params.kappa * Y / (2 * params.lambda_temp)


@dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray
    I: np.ndarray
    A: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    u: np.ndarray  # u[i] acts on [t_i, t_{i+1}); u[N] is the terminal-condition value
    zeta: np.ndarray
    costs: CostComponents

    @property
    def reduced_cost(self) -> float:
        return float(self.costs.total)

    @property
    def u_steps(self) -> np.ndarray:
        return self.u[:-1]

    def columns(self) -> dict[str, np.ndarray]:
        return {"t": self.grid, "I": self.I, "A": self.A, "X": self.X, "Y": self.Y, "u": self.u, "zeta": self.zeta}


@dataclass
class BatchResult:
    costs: CostComponents
    X: np.ndarray | None = None
    Y: np.ndarray | None = None
    u: np.ndarray | None = None
    zeta: np.ndarray | None = None


def simulate_batch(schedule, params: ModelParams, grid, rates, dA=None, keep_paths: bool = False) -> BatchResult:
    """Step many paths of the closed loop at once.

    ``schedule`` supplies ``rate(i, X, Y, I)`` and ``zeta(i, I)``; ``rates`` has shape
    (n_paths, N+1).  ``params`` are the *true* dynamics/cost parameters, which
    may differ from the ones the law was built with.
    """
    grid = np.asarray(grid, dtype=float)
    rates = np.atleast_2d(rates)
    if dA is None:
        dA = trapezoid_increments(grid, rates)
    n, N = rates.shape[0], grid.size - 1
    dt = np.diff(grid)
    e_rho, w_rho = transient_decay(grid, params.rho)
    X = np.full(n, params.x0)
    Y = np.full(n, params.y0)
    sig = np.zeros(n)
    trans = np.zeros(n)
    temp = np.zeros(n)
    run = np.zeros(n)
    if keep_paths:
        Xs, Ys, us, zs = (np.empty((n, N + 1)) for _ in range(4))
    for i in range(N):
        u = schedule.rate(i, X, Y, rates[:, i])
        X_next = X - u * dt[i]
        Y_next = e_rho[i] * Y + params.gamma * u * w_rho[i]
        sig += 0.5 * (X + X_next) * dA[:, i]
        trans += u * dt[i] * 0.5 * (Y + Y_next)
        temp += u * u * dt[i]
        run += 0.5 * dt[i] * (X * X + X_next * X_next)
        if keep_paths:
            Xs[:, i], Ys[:, i], us[:, i], zs[:, i] = X, Y, u, schedule.zeta(i, rates[:, i])
        X, Y = X_next, Y_next
    costs = CostComponents(sig, params.kappa * trans, params.lambda_temp * temp, params.phi * run,
                           params.varrho * X * X)
    if not keep_paths:
        return BatchResult(costs)
    Xs[:, N], Ys[:, N], zs[:, N] = X, Y, schedule.zeta(N, rates[:, N])
    us[:, N] = terminal_rate(X, Y, params)
    return BatchResult(costs, Xs, Ys, us, zs)


class ForcedSchedule:
    """Diagnostic schedule that ignores the state: u_i = f(t_i)."""

    def __init__(self, grid, rate: Callable | float):
        grid = np.asarray(grid, dtype=float)
        self._u = np.broadcast_to(rate(grid) if callable(rate) else float(rate), grid.shape).astype(float)

    def rate(self, i, X, Y, I):
        return np.full(np.shape(X), self._u[i])

    def zeta(self, i, I):
        return np.zeros(np.shape(I))


def simulate_closed_loop(law, path: SignalPath, eval_params: ModelParams | None = None,
                         forced_rate: Callable | float | None = None) -> Trajectory:
    """Run one signal path through the closed loop and return the full trajectory."""
    params = eval_params if eval_params is not None else law.params
    grid = validate_grid(path.grid)
    schedule = ForcedSchedule(grid, forced_rate) if forced_rate is not None else law.schedule(grid)
    res = simulate_batch(schedule, params, grid, path.rate[None, :], path.increments[None, :], keep_paths=True)
    costs = CostComponents(*(float(getattr(res.costs, f)[0]) for f in
                             ("signal_gain", "transient_cost", "temporary_cost", "running_penalty",
                              "terminal_penalty")))
    return Trajectory(grid, path.rate.copy(), path.cumulative.copy(), res.X[0], res.Y[0], res.u[0], res.zeta[0],
                      costs)


def reduced_cost(traj: Trajectory, path: SignalPath, params: ModelParams) -> float:
    """Recompute the reduced functional of a trajectory against a signal path."""
    if traj.grid.shape != path.grid.shape or not np.array_equal(traj.grid, path.grid):
        raise GridMismatch("trajectory and signal path live on different grids")
    return float(cost_components(traj.grid, traj.X, traj.Y, traj.u_steps, path.increments, params).total)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass
class MCSummary:
    n_paths: int
    names: list[str]
    mean: np.ndarray
    stderr: np.ndarray
    # paired differences against the first strategy, same paths
    diff_mean: np.ndarray
    diff_stderr: np.ndarray
    samples: np.ndarray = field(repr=False, default=None)  # (n_strategies, n_paths)

    @property
    def ranking(self) -> list[str]:
        return [self.names[k] for k in np.argsort(-self.mean, kind="stable")]

    def z_scores(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.diff_stderr > 0, self.diff_mean / self.diff_stderr, 0.0)

    def rows(self) -> list[dict]:
        return [{"strategy": n, "mean_cost": float(m), "stderr": float(s), "n_paths": self.n_paths,
                 "diff_vs_first": float(d), "diff_stderr": float(ds)}
                for n, m, s, d, ds in zip(self.names, self.mean, self.stderr, self.diff_mean, self.diff_stderr)]


def _stderr(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    return np.std(x, axis=-1, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(x.shape[:-1])


def summarize(names: Sequence[str], samples: np.ndarray) -> MCSummary:
    samples = np.asarray(samples, dtype=float)
    diffs = samples - samples[0]
    return MCSummary(samples.shape[1], list(names), samples.mean(axis=1), _stderr(samples),
                     diffs.mean(axis=1), _stderr(diffs), samples)


def compare_strategies(laws: Sequence, signal, n_paths: int, seed: int, grid,
                       eval_params: ModelParams | None = None, names: Sequence[str] | None = None,
                       chunk: int = 2000) -> MCSummary:
    """Mean reduced cost of each law on the same signal paths (common random numbers)."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    grid = validate_grid(grid)
    params = eval_params if eval_params is not None else laws[0].params
    names = list(names) if names is not None else [getattr(l, "name", f"law{k}") for k, l in enumerate(laws)]
    schedules = [law.schedule(grid) for law in laws]
    out = np.empty((len(laws), n_paths))
    for start in range(0, n_paths, chunk):
        m = min(chunk, n_paths - start)
        rates = signal.rates(grid, m, seed, start)
        dA = trapezoid_increments(grid, rates)
        for k, sched in enumerate(schedules):
            out[k, start:start + m] = simulate_batch(sched, params, grid, rates, dA).costs.total
    return summarize(names, out)


@dataclass
class FullCostReport:
    n_paths: int
    mean_full_minus_xp0: float
    mean_reduced: float
    diff_mean: float
    diff_stderr: float
    max_abs_diff: float

    @property
    def consistent(self) -> bool:
        return abs(self.diff_mean) <= 3 * self.diff_stderr + 1e-9 * (1 + abs(self.mean_reduced))


def full_cost_mc(law, signal, n_paths: int, seed: int, grid, martingale_vol: float = 0.0,
                 p0: float = 0.0, eval_params: ModelParams | None = None, chunk: int = 2000) -> FullCostReport:
    """Evaluate the unreduced functional with P = P0 + sigma_P W + A and compare with the reduced one.

    The trade over step i is booked at the step-average price (P_i + P_{i+1})/2;
    with that convention the discrete summation by parts
    sum u_i dt_i (P_i + P_{i+1})/2 + X_N P_N = x P_0 + sum (X_i + X_{i+1})/2 dP_i
    holds exactly, so the two functionals differ only by the martingale sum
    sigma_P sum (X_i + X_{i+1})/2 dW_i, which has mean zero.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    if martingale_vol < 0:
        raise ValueError("martingale_vol must be >= 0")
    grid = validate_grid(grid)
    params = eval_params if eval_params is not None else law.params
    schedule = law.schedule(grid)
    dt = np.diff(grid)
    full = np.empty(n_paths)
    red = np.empty(n_paths)
    for start in range(0, n_paths, chunk):
        m = min(chunk, n_paths - start)
        rates = signal.rates(grid, m, seed, start)
        dA = trapezoid_increments(grid, rates)
        dW = np.stack([np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(start + j, 1)))
                       .standard_normal(dt.size) for j in range(m)]) * np.sqrt(dt)
        P = p0 + np.concatenate([np.zeros((m, 1)), np.cumsum(martingale_vol * dW + dA, axis=1)], axis=1)
        res = simulate_batch(schedule, params, grid, rates, dA, keep_paths=True)
        u = res.u[:, :-1]
        X, Y = res.X, res.Y
        cash = np.sum((0.5 * (P[:, :-1] + P[:, 1:]) - params.kappa * 0.5 * (Y[:, :-1] + Y[:, 1:])) * u * dt, axis=1)
        full[start:start + m] = (cash - params.lambda_temp * np.sum(u * u * dt, axis=1) + X[:, -1] * P[:, -1]
                                 - params.phi * np.sum(0.5 * dt * (X[:, :-1] ** 2 + X[:, 1:] ** 2), axis=1)
                                 - params.varrho * X[:, -1] ** 2) - params.x0 * p0
        red[start:start + m] = res.costs.total
    d = full - red
    return FullCostReport(n_paths, float(full.mean()), float(red.mean()), float(d.mean()),
                          float(_stderr(d)), float(np.max(np.abs(d))))


__all__ = [
    "CostComponents", "Trajectory", "MCSummary", "FullCostReport", "GridMismatch",
    "cost_components", "running_weights", "simulate_batch", "simulate_closed_loop", "reduced_cost",
    "compare_strategies", "full_cost_mc", "summarize", "terminal_rate", "transient_decay", "path_rng",
]
