"""Predictive signal A = int I ds: simulation and conditional-expectation predictors.

Three signal variants are shipped: an Ornstein-Uhlenbeck rate, a
deterministic rate function and the zero signal.  Each exposes a predictor
that returns E_t[int_t^T w(s) dA_s] for a weight w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import integrate

DEFAULT_TOL = 1e-10


class InvalidGrid(ValueError):
    pass


def make_grid(horizon: float, n_steps: int) -> np.ndarray:
    if n_steps < 1:
        raise InvalidGrid("n_steps must be >= 1")
    return np.linspace(0.0, horizon, n_steps + 1)


def validate_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidGrid("grid needs at least two nodes")
    if grid[0] != 0.0:
        raise InvalidGrid("grid must start at t = 0")
    if not np.all(np.diff(grid) > 0):
        raise InvalidGrid("grid must be strictly increasing")
    return grid


def trapezoid_cumulative(grid: np.ndarray, rate: np.ndarray) -> np.ndarray:
    """A on the nodes, trapezoid rule on the rate (last axis), A_0 = 0."""
    steps = 0.5 * (rate[..., :-1] + rate[..., 1:]) * np.diff(grid)
    return np.concatenate([np.zeros(steps.shape[:-1] + (1,)), np.cumsum(steps, axis=-1)], axis=-1)


def trapezoid_increments(grid: np.ndarray, rate: np.ndarray) -> np.ndarray:
    """Per-step increments, taken as differences of the cumulative sum so the two agree exactly."""
    return np.diff(trapezoid_cumulative(grid, rate), axis=-1)


@dataclass(frozen=True)
class SignalPath:
    grid: np.ndarray
    rate: np.ndarray
    increments: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_rates(cls, grid, rate) -> "SignalPath":
        grid = validate_grid(grid)
        rate = np.asarray(rate, dtype=float)
        if rate.shape != grid.shape:
            raise InvalidGrid("rate must have one value per grid node")
        cum = trapezoid_cumulative(grid, rate)
        return cls(grid, rate, np.diff(cum), cum)

    @property
    def n_steps(self) -> int:
        return self.grid.size - 1


@dataclass(frozen=True)
class OUSignalParams:
    iota: float = 1.0
    beta: float = 0.1
    sigma: float = 0.5

    def __post_init__(self) -> None:
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be > 0")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be >= 0")

    def mean(self, t):
        return self.iota * np.exp(-self.beta * np.asarray(t, dtype=float))

    def variance(self, t):
        return self.sigma**2 * -np.expm1(-2 * self.beta * np.asarray(t, dtype=float)) / (2 * self.beta)


# iota=1, beta=0.1, sigma=0.5
REFERENCE_SIGNAL = OUSignalParams(iota=1.0, beta=0.1, sigma=0.5)


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for path ``index``; identical for every strategy and worker layout."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def simulate_ou_rates(ou: OUSignalParams, grid, n_paths: int, seed: int, start: int = 0) -> np.ndarray:
    """OU rates on the grid for paths ``start .. start + n_paths - 1``, shape (n_paths, N + 1).

    Exact transition of the deviation from the mean, D = I - iota exp(-beta t):
    D_{i+1} = exp(-beta dt) D_i + sigma sqrt((1 - exp(-2 beta dt)) / (2 beta)) xi_i.
    """
    grid = validate_grid(grid)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    dt = np.diff(grid)
    decay = np.exp(-ou.beta * dt)
    sd = ou.sigma * np.sqrt(-np.expm1(-2 * ou.beta * dt) / (2 * ou.beta))
    noise = np.stack([path_rng(seed, start + j).standard_normal(dt.size) for j in range(n_paths)])
    dev = np.zeros((n_paths, grid.size))
    for i in range(dt.size):
        dev[:, i + 1] = decay[i] * dev[:, i] + sd[i] * noise[:, i]
    return ou.iota * np.exp(-ou.beta * grid) + dev


def simulate_ou_paths(ou: OUSignalParams, grid, n_paths: int, seed: int) -> list[SignalPath]:
    grid = validate_grid(grid)
    rates = simulate_ou_rates(ou, grid, n_paths, seed)
    return [SignalPath.from_rates(grid, r) for r in rates]


# --------------------------------------------------------------------------
# predictors


class Predictor:
    """E_t[int_t^T w(s) dA_s] for the signal it belongs to.

    ``rate_proportional`` predictors (OU) scale with the current rate I_t; the
    others ignore it.
    """

    rate_proportional = False

    def __init__(self, horizon: float):
        self.horizon = float(horizon)

    def _kernel(self, s: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Density of E_t[dA_s] / ds (per unit rate when rate-proportional)."""
        raise NotImplementedError

    def unit_integrals(self, t, weight2: Callable, tol: float = DEFAULT_TOL) -> np.ndarray:
        """For each t_i, int_{t_i}^T kernel(s, t_i) weight2(t_i, s) ds."""
        t = np.atleast_1d(np.asarray(t, dtype=float))

        def f(s, owner):
            ti = t[owner][:, None]
            return self._kernel(s, ti) * weight2(ti, s)

        return integrate(f, t, self.horizon, tol=tol, graded=self._grading())

    def _grading(self) -> int:
        return 0

    def expected_weighted_increments(self, t: float, weight: Callable, rate: float | None = None,
                                     tol: float = DEFAULT_TOL) -> float:
        val = float(self.unit_integrals([t], lambda ti, s: weight(s), tol)[0])
        if self.rate_proportional:
            if rate is None:
                raise ValueError("this predictor needs the current signal rate")
            val *= rate
        return val


class ZeroPredictor(Predictor):
    def _kernel(self, s, t):
        return np.zeros(np.broadcast(s, t).shape)

    def unit_integrals(self, t, weight2, tol=DEFAULT_TOL):
        return np.zeros(np.atleast_1d(t).shape)

    def expected_weighted_increments(self, t, weight, rate=None, tol=DEFAULT_TOL):
        return 0.0


class OUPredictor(Predictor):
    """E_t[dA_s] = I_t exp(-beta (s - t)) ds."""

    rate_proportional = True

    def __init__(self, beta: float, horizon: float):
        super().__init__(horizon)
        self.beta = float(beta)

    def _kernel(self, s, t):
        return np.exp(-self.beta * (s - t))

    def _grading(self) -> int:
        return decay_grading(self.beta, self.horizon)


class DeterministicPredictor(Predictor):
    def __init__(self, rate_fn: Callable, horizon: float):
        super().__init__(horizon)
        self.rate_fn = rate_fn

    def _kernel(self, s, t):
        return np.broadcast_to(self.rate_fn(s), np.broadcast(s, t).shape)


# --------------------------------------------------------------------------
# signal variants


class ZeroSignal:
    name = "zero"

    def predictor(self, horizon: float) -> Predictor:
        return ZeroPredictor(horizon)

    def rates(self, grid, n_paths: int = 1, seed: int = 0, start: int = 0) -> np.ndarray:
        return np.zeros((n_paths, np.asarray(grid).size))

    @property
    def is_deterministic(self) -> bool:
        return True


class DeterministicSignal:
    name = "deterministic"

    def __init__(self, rate_fn: Callable):
        self.rate_fn = rate_fn

    @classmethod
    def exponential(cls, iota: float, beta: float) -> "DeterministicSignal":
        """I(t) = iota exp(-beta t), evaluated exactly like the OU mean path."""
        return cls(lambda t: iota * np.exp(-beta * np.asarray(t, dtype=float)))

    @classmethod
    def constant(cls, c: float) -> "DeterministicSignal":
        return cls(lambda t: np.full(np.shape(t), float(c)))

    @classmethod
    def from_table(cls, times, rates) -> "DeterministicSignal":
        times = np.asarray(times, dtype=float)
        rates = np.asarray(rates, dtype=float)
        if times.ndim != 1 or times.shape != rates.shape or not np.all(np.diff(times) > 0):
            raise ValueError("rate table needs strictly increasing times and matching rates")
        return cls(lambda t: np.interp(t, times, rates))

    def predictor(self, horizon: float) -> Predictor:
        return DeterministicPredictor(self.rate_fn, horizon)

    def rates(self, grid, n_paths: int = 1, seed: int = 0, start: int = 0) -> np.ndarray:
        r = np.asarray(self.rate_fn(np.asarray(grid, dtype=float)), dtype=float)
        return np.broadcast_to(r, (n_paths, r.size)).copy()

    @property
    def is_deterministic(self) -> bool:
        return True


class OUSignal:
    name = "ou"

    def __init__(self, params: OUSignalParams):
        self.params = params

    def predictor(self, horizon: float) -> Predictor:
        return OUPredictor(self.params.beta, horizon)

    def rates(self, grid, n_paths: int = 1, seed: int = 0, start: int = 0) -> np.ndarray:
        return simulate_ou_rates(self.params, grid, n_paths, seed, start)

    @property
    def is_deterministic(self) -> bool:
        return self.params.sigma == 0.0


def decay_grading(beta: float, length: float) -> int:
    """Number of graded panels needed when exp(-beta s) decays within one panel."""
    ratio = beta * length
    return 0 if ratio < 20 else int(math.ceil(math.log2(ratio))) + 2


def make_predictor(signal, horizon: float) -> Predictor:
    return signal.predictor(horizon)


def ou_kernels(t: float, coeffs, beta: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """(K1, K2) at time t for an OU rate with mean reversion ``beta``.

    K1 = int_t^T e^{-beta(s-t)} S43(T-s) ds / S44(T-t)
    K2 = int_t^T e^{-beta(s-t)} G3(T-s) ds / G3(T-t)
    ``coeffs`` is a CoefficientSet (it carries the horizon and eigen-system).
    """
    from .model import G_vec_scaled

    eig = coeffs.eig
    T = coeffs.params.horizon
    tau = T - t

    def k1(s, owner):
        return np.exp(-beta * (s - t)) * coeffs.row4_kernel(tau, T - s)

    g3_tau = G_vec_scaled(tau, eig)[2]

    def k2(s, owner):
        g3 = G_vec_scaled(T - s, eig)[..., 2]
        return np.exp(-beta * (s - t)) * g3 / g3_tau * np.exp(eig.growth * (t - s))

    k = decay_grading(beta, tau)
    return float(integrate(k1, [t], T, tol, graded=k)[0]), float(integrate(k2, [t], T, tol, graded=k)[0])
