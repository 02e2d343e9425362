"""Brute-force ground truth for deterministic scenarios.

With the signal path known, the discretised reduced functional is a concave
quadratic in the step rates u in R^N:

    J(u) = 1/2 u^T H u + g^T u + c.

The oracle assembles H, g, c from the state maps X = x0 - C u and
Y = y0 e^{-rho t} + K u, solves the first-order condition with a dense
Cholesky factorisation of -H, and provides residual checks for candidate
strategies (directional derivatives and the adjoint system).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .model import ModelParams
from .signals import SignalPath, make_grid, validate_grid
from .simulator import Trajectory, cost_components, running_weights, transient_decay

MAX_N = 2000


class NotNegativeDefinite(np.linalg.LinAlgError):
    pass


class OracleViolation(AssertionError):
    """A candidate beat the oracle optimum by more than the solver tolerance."""


class _KappaView:
    """Read-only view of ModelParams with kappa replaced (kappa = 0 is not a valid ModelParams)."""

    def __init__(self, params: ModelParams, kappa: float):
        self._p, self.kappa = params, kappa

    def __getattr__(self, name):
        return getattr(self._p, name)


@dataclass
class DiscreteProblem:
    grid: np.ndarray
    params: ModelParams
    dA: np.ndarray
    max_n: int = MAX_N
    # kappa = 0 (purely temporary impact) is outside ModelParams but fine for the oracle
    kappa_override: float | None = None

    def __post_init__(self) -> None:
        self.grid = validate_grid(self.grid)
        self.dA = np.asarray(self.dA, dtype=float)
        if self.n < 2:
            raise ValueError("oracle needs N >= 2 steps")
        if self.n > self.max_n:
            raise ValueError(f"N = {self.n} exceeds the dense-solve limit {self.max_n}")
        if self.dA.shape != (self.n,):
            raise ValueError("dA must have one entry per step")
        if self.kappa_override is not None and not self.kappa_override >= 0:
            raise ValueError("kappa_override must be >= 0")

    @property
    def kappa(self) -> float:
        return self.params.kappa if self.kappa_override is None else float(self.kappa_override)

    @classmethod
    def from_path(cls, params: ModelParams, path: SignalPath, max_n: int = MAX_N,
                  kappa_override: float | None = None) -> "DiscreteProblem":
        return cls(path.grid, params, path.increments, max_n, kappa_override)

    @classmethod
    def from_signal(cls, params: ModelParams, n_steps: int, signal=None, max_n: int = MAX_N,
                    kappa_override: float | None = None) -> "DiscreteProblem":
        grid = make_grid(params.horizon, n_steps)
        rates = np.zeros(grid.size) if signal is None else signal.rates(grid)[0]
        return cls.from_path(params, SignalPath.from_rates(grid, rates), max_n, kappa_override)

    @property
    def n(self) -> int:
        return self.grid.size - 1

    @cached_property
    def dt(self) -> np.ndarray:
        return np.diff(self.grid)

    @cached_property
    def _maps(self):
        """C (N+1, N) and K (N+1, N) with X = x0 - C u and Y = Y_free + K u."""
        p, t, dt = self.params, self.grid, self.dt
        N = self.n
        lower = np.tril(np.ones((N + 1, N)), -1)
        C = lower * dt[None, :]
        _, w = transient_decay(t, p.rho)
        lag = t[:, None] - t[None, 1:]
        with np.errstate(over="ignore"):
            K = np.where(lower > 0, p.gamma * w[None, :] * np.exp(-p.rho * np.maximum(lag, 0.0)), 0.0)
        y_free = p.y0 * np.exp(-p.rho * t)
        return C, K, y_free

    @cached_property
    def quadratic(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(H, g, c); H is symmetric by construction."""
        p, dt = self.params, self.dt
        C, K, y_free = self._maps
        w = running_weights(self.grid)
        N = self.n
        avg = 0.5 * (K[:-1] + K[1:])           # step-average of Y, linear part
        avg_free = 0.5 * (y_free[:-1] + y_free[1:])
        T = dt[:, None] * avg                  # u^T T u = sum u_i dt_i Ybar_i(u)
        cN = C[-1]
        kap = self.kappa
        H = -kap * (T + T.T) - 2 * p.lambda_temp * np.diag(dt) \
            - 2 * p.phi * (C.T * w) @ C - 2 * p.varrho * np.outer(cN, cN)
        H = 0.5 * (H + H.T)
        g = -(0.5 * (C[:-1] + C[1:]).T @ self.dA) - kap * dt * avg_free + 2 * p.phi * p.x0 * (C.T @ w) \
            + 2 * p.varrho * p.x0 * cN
        c = p.x0 * self.dA.sum() - p.phi * p.x0**2 * w.sum() - p.varrho * p.x0**2
        assert H.shape == (N, N)
        return H, g, float(c)

    def states(self, u) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) on the nodes by the same recursion as the simulator."""
        p = self.params
        u = np.asarray(u, dtype=float)
        X = p.x0 - np.concatenate([[0.0], np.cumsum(u * self.dt)])
        e, w = transient_decay(self.grid, p.rho)
        Y = np.empty(self.n + 1)
        Y[0] = p.y0
        for i in range(self.n):
            Y[i + 1] = e[i] * Y[i] + p.gamma * u[i] * w[i]
        return X, Y

    def cost(self, u) -> float:
        X, Y = self.states(u)
        p = self.params if self.kappa_override is None else _KappaView(self.params, self.kappa)
        return float(cost_components(self.grid, X, Y, np.asarray(u, dtype=float), self.dA, p).total)

    def cost_quadratic(self, u) -> float:
        H, g, c = self.quadratic
        u = np.asarray(u, dtype=float)
        return float(0.5 * u @ H @ u + g @ u + c)


def discrete_gradient(prob: DiscreteProblem, u, method: str = "recursion") -> np.ndarray:
    """dJ/du_k, either by a backward recursion over the state sensitivities or as H u + g."""
    u = np.asarray(u, dtype=float)
    if method == "quadratic":
        H, g, _ = prob.quadratic
        return H @ u + g
    if method != "recursion":
        raise ValueError("method must be 'recursion' or 'quadratic'")
    p, dt = prob.params, prob.dt
    N = prob.n
    X, Y = prob.states(u)
    e, w = transient_decay(prob.grid, p.rho)
    w_node = running_weights(prob.grid)
    # sums over steps j >= k+1 and nodes j >= k+1
    dA_future = np.concatenate([np.cumsum(prob.dA[::-1])[::-1][1:], [0.0]])
    wx_future = np.cumsum((w_node * X)[::-1])[::-1][1:]
    # F_k = sum_{i > k} u_i dt_i (e^{-rho(t_i - t_{k+1})} + e^{-rho(t_{i+1} - t_{k+1})}) / 2
    F = np.zeros(N)
    acc = 0.0
    for k in range(N - 1, -1, -1):
        F[k] = acc
        acc = u[k] * dt[k] * 0.5 * (1.0 + e[k]) + e[k] * acc
    y_bar = 0.5 * (Y[:-1] + Y[1:])
    return (-dt * (dA_future + 0.5 * prob.dA)
            - prob.kappa * (dt * y_bar + p.gamma * w * (0.5 * u * dt + F))
            - 2 * p.lambda_temp * u * dt
            + 2 * p.phi * dt * wx_future
            + 2 * p.varrho * X[-1] * dt)


@dataclass
class OracleSolution:
    u_star: np.ndarray
    cost: float
    grad_norm: float
    solver_stats: dict = field(default_factory=dict)


def solve_foc(prob: DiscreteProblem, tol: float = 1e-9) -> OracleSolution:
    H, g, _ = prob.quadratic
    try:
        factor = scipy.linalg.cho_factor(-H, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotNegativeDefinite(f"Hessian is not negative definite: {exc}") from exc
    u = scipy.linalg.cho_solve(factor, g)
    grad = discrete_gradient(prob, u, "quadratic")
    scale = max(1.0, float(np.max(np.abs(g))))
    gnorm = float(np.max(np.abs(grad)))
    diag = np.diag(factor[0])
    stats = {"n": prob.n, "scale": scale, "min_pivot": float(diag.min() ** 2),
             "max_pivot": float(diag.max() ** 2), "tol": tol}
    if gnorm > tol * scale:
        raise ArithmeticError(f"FOC residual {gnorm:.3e} above {tol * scale:.3e}")
    return OracleSolution(u, prob.cost(u), gnorm, stats)


def check_candidate(prob: DiscreteProblem, sol: OracleSolution, u, tol: float = 1e-9) -> float:
    """Return J(u) and fail loudly if it exceeds the oracle optimum."""
    val = prob.cost(u)
    if val > sol.cost + tol * max(1.0, abs(sol.cost)):
        raise OracleViolation(f"candidate cost {val!r} exceeds oracle optimum {sol.cost!r}")
    return val


def _weighted_norm(v, dt) -> float:
    return float(np.sqrt(np.sum(dt * v * v)))


def gateaux_residual(prob: DiscreteProblem, u, alpha) -> float:
    """<J'(u), alpha> / (|alpha| max(1, |J'(u)|)) with dt-weighted L2 norms.

    The discrete gradient is dt_k times the Gateaux density, so the pairing
    sum_k grad_k alpha_k approximates int J'(u)_s alpha_s ds.
    """
    dt = prob.dt
    grad = discrete_gradient(prob, u)
    alpha = np.asarray(alpha, dtype=float)
    return float(grad @ alpha / (_weighted_norm(alpha, dt) * max(1.0, _weighted_norm(grad / dt, dt))))


def directional_derivative(prob: DiscreteProblem, u, alpha) -> float:
    return float(discrete_gradient(prob, u) @ np.asarray(alpha, dtype=float))


def smooth_direction_functions(horizon: float, n: int, seed: int, modes: int = 8) -> list:
    """Random bounded perturbation shapes alpha(t) on [0, T]: low sine modes scaled to sup-norm 1."""
    rng = np.random.default_rng(seed)
    k = np.arange(modes)
    fine = np.linspace(0.0, horizon, 4001)
    out = []
    for _ in range(n):
        coef = rng.standard_normal(modes) / (1.0 + k)
        phase = rng.uniform(0, 2 * np.pi, modes)

        def raw(t, coef=coef, phase=phase):
            t = np.asarray(t, dtype=float)
            arg = np.pi * (k + 0.5) * t[..., None] / horizon + phase
            return np.sin(arg) @ coef

        peak = float(np.max(np.abs(raw(fine))))
        out.append(lambda t, raw=raw, peak=peak: raw(t) / peak)
    return out


def smooth_directions(grid: np.ndarray, n: int, seed: int, modes: int = 8) -> np.ndarray:
    """The shapes of smooth_direction_functions evaluated at the step midpoints, shape (n, N)."""
    grid = np.asarray(grid, dtype=float)
    mid = 0.5 * (grid[:-1] + grid[1:])
    return np.stack([f(mid) for f in smooth_direction_functions(grid[-1], n, seed, modes)])


def discretized_closed_form(traj: Trajectory) -> np.ndarray:
    """Step rates (X(t_i) - X(t_{i+1})) / dt_i: the cell averages of the continuous optimal rate.

    With piecewise-constant rates these reproduce the closed-form inventory at
    every node exactly.
    """
    return -np.diff(traj.X) / np.diff(traj.grid)


# --------------------------------------------------------------------------
# adjoint system


@dataclass
class FBSDEReport:
    du: float
    dZ: float
    terminal_u: float
    terminal_Z: float
    scales: dict
    Z: np.ndarray = field(repr=False, default=None)

    def normalized(self) -> dict[str, float]:
        s = self.scales
        return {"du": self.du / s["du"], "dZ": self.dZ / s["dZ"],
                "terminal_u": self.terminal_u / s["terminal_u"], "terminal_Z": self.terminal_Z / s["terminal_Z"]}

    def passes(self, tol: float = 5e-3) -> bool:
        return all(v <= tol for v in self.normalized().values())


def fbsde_residual(traj: Trajectory, law, u_scale: float = 1.0) -> FBSDEReport:
    """Finite-difference residuals of the adjoint system along a deterministic trajectory.

    Z is rebuilt from its representation in terms of (X, Y, u) and the
    predicted future signal.  Checks, with forward differences on the grid:
      du/dt = I/(2 lam) + kappa rho Y/(2 lam) - phi X/lam + rho Z/(2 lam)
      dZ/dt = rho Z + kappa gamma u
      u_T   = varrho X_T/lam - kappa Y_T/(2 lam)   (trajectory value and feedback-formula limit)
      Z_T   = 0
    ``u_scale`` multiplies u before the check (sensitivity diagnostics).
    """
    p = law.params
    lam = p.lambda_temp
    grid = traj.grid
    T = p.horizon
    dt = np.diff(grid)
    X, Y, I = traj.X, traj.Y, traj.I
    u = u_scale * traj.u
    ratio = np.asarray(law.coeffs(T - grid).s_ratio)
    pred = law.adjoint_coef(grid)
    if law.predictor.rate_proportional:
        pred = pred * I
    Z = -(ratio[:, 0] * X + ratio[:, 1] * Y + ratio[:, 2] * u) - pred / (2 * lam)

    drift_u = I / (2 * lam) + p.kappa * p.rho * Y / (2 * lam) - p.phi * X / lam + p.rho * Z / (2 * lam)
    drift_z = p.rho * Z + p.kappa * p.gamma * u
    fd_u = np.diff(u) / dt
    fd_z = np.diff(Z) / dt
    sched = law.schedule(grid)
    u_formula = u_scale * (sched.kx[-1] * X[-1] + sched.ky[-1] * Y[-1] + sched.zeta(grid.size - 1, I[-1]))
    u_term = (p.varrho * X[-1] - 0.5 * p.kappa * Y[-1]) / lam

    def scale(*arrs):
        return max(1.0, max(float(np.max(np.abs(a))) for a in arrs))

    scales = {
        "du": scale(fd_u, I / (2 * lam), p.kappa * p.rho * Y / (2 * lam), p.phi * X / lam, p.rho * Z / (2 * lam)),
        "dZ": scale(fd_z, p.rho * Z, p.kappa * p.gamma * u),
        "terminal_u": scale(np.array([u_term, u_formula])),
        "terminal_Z": scale(Z),
    }
    return FBSDEReport(
        du=float(np.max(np.abs(fd_u - drift_u[:-1]))),
        dZ=float(np.max(np.abs(fd_z - drift_z[:-1]))),
        terminal_u=float(max(abs(u_formula - u_term), abs(u[-1] - u_term))),
        terminal_Z=float(abs(Z[-1])),
        scales=scales,
        Z=Z,
    )


__all__ = [
    "DiscreteProblem", "OracleSolution", "FBSDEReport", "NotNegativeDefinite", "OracleViolation",
    "discrete_gradient", "solve_foc", "check_candidate", "gateaux_residual", "directional_derivative",
    "smooth_directions", "smooth_direction_functions", "fbsde_residual", "discretized_closed_form",
]
