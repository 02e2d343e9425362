"""Optimal feedback law, its signal intercept, closed-loop matrices and fundamental solution."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import (
    DEFAULT_FLOOR,
    AssumptionViolated,
    CoefficientSet,
    EigenSystem,
    ModelParams,
    build_eigen_system,
    check_assumption,
)
from .quadrature import integrate
from .signals import DEFAULT_TOL, Predictor, SignalPath, ZeroSignal, trapezoid_cumulative, validate_grid
from .simulator import Trajectory, cost_components, terminal_rate


class SingularPhi(ArithmeticError):
    pass


@dataclass(frozen=True)
class LawSchedule:
    """A feedback law frozen onto a grid: u_i = kx_i X + ky_i Y + zeta_i(I_i) + offset_i."""

    grid: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    zeta_coef: np.ndarray
    rate_proportional: bool
    offset: np.ndarray

    def zeta(self, i: int, I):
        if self.rate_proportional:
            return self.zeta_coef[i] * np.asarray(I, dtype=float)
        return np.broadcast_to(self.zeta_coef[i], np.shape(I)).astype(float)

    def rate(self, i: int, X, Y, I):
        return self.kx[i] * X + self.ky[i] * Y + self.zeta(i, I) + self.offset[i]


@dataclass(frozen=True)
class ClosedLoopState:
    t: float
    X: float
    Y: float
    zeta: float
    u: float
    Z: float


def _grid_key(grid: np.ndarray) -> tuple:
    return grid.size, float(grid[-1]), hash(grid.tobytes())


@dataclass(frozen=True)
class FeedbackLaw:
    """u = v0 (v1 X + v2 Y) + zeta_hat, optionally shifted by epsilon * alpha(t)."""

    params: ModelParams
    eig: EigenSystem
    coeffs: CoefficientSet
    predictor: Predictor
    name: str = "adaptive"
    perturbation: Callable | None = None
    epsilon: float = 0.0
    # grid -> (kx, ky, zeta_coef); the perturbation is never cached so copies may share it
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(cls, params: ModelParams, signal=None, name: str = "adaptive",
              floor: float = DEFAULT_FLOOR) -> "FeedbackLaw":
        eig = build_eigen_system(params)
        signal = signal if signal is not None else ZeroSignal()
        return cls(params, eig, CoefficientSet(params, eig, floor), signal.predictor(params.horizon), name)

    def perturbed(self, alpha: Callable, epsilon: float, name: str | None = None) -> "FeedbackLaw":
        return dataclasses.replace(self, perturbation=alpha, epsilon=float(epsilon),
                                   name=name or f"{self.name}+{epsilon:g}a")

    @property
    def horizon(self) -> float:
        return self.params.horizon

    def _tau(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.horizon):
            raise ValueError("t must lie in [0, T]")
        return self.horizon - t

    def _offset(self, t):
        if self.perturbation is None or self.epsilon == 0.0:
            return np.zeros(np.shape(t))
        return self.epsilon * np.broadcast_to(self.perturbation(np.asarray(t, dtype=float)), np.shape(t))

    def zeta(self, t: float, rate: float | None = None, tol: float = DEFAULT_TOL) -> float:
        """Signal intercept zeta_hat_t; ``rate`` is the current I_t for rate-driven predictors."""
        tau = float(self._tau(t))
        if tau == 0.0:
            return 0.0
        val = self.predictor.expected_weighted_increments(
            float(t), lambda s: self.coeffs.signal_kernel(tau, self.horizon - s), rate, tol)
        return val / (2 * self.params.lambda_temp)

    def rate(self, t: float, X, Y, rate: float | None = None):
        """Optimal trading rate at time t < T (at t = T the terminal condition is used)."""
        tau = float(self._tau(t))
        if tau == 0.0:
            return terminal_rate(np.asarray(X, dtype=float), np.asarray(Y, dtype=float), self.params)
        c = self.coeffs(tau)
        return c.v0v1 * np.asarray(X) + c.v0v2 * np.asarray(Y) + self.zeta(t, rate) + self._offset(float(t))

    def _base_schedule(self, grid: np.ndarray, tol: float):
        key = _grid_key(grid)
        if key not in self._cache:
            T = self.horizon
            c = self.coeffs(T - grid)
            lam2 = 2 * self.params.lambda_temp
            zc = self.predictor.unit_integrals(
                grid, lambda ti, s: self.coeffs.signal_kernel(T - ti, T - s), tol) / lam2
            self._cache[key] = (np.asarray(c.v0v1, dtype=float), np.asarray(c.v0v2, dtype=float), zc)
        return self._cache[key]

    def schedule(self, grid, tol: float = DEFAULT_TOL) -> LawSchedule:
        grid = validate_grid(grid)
        if not np.isclose(grid[-1], self.horizon, rtol=0, atol=1e-12 * self.horizon):
            raise ValueError("grid must end at the horizon")
        kx, ky, zc = self._base_schedule(grid, tol)
        return LawSchedule(grid, kx, ky, zc, self.predictor.rate_proportional, self._offset(grid))

    def adjoint_coef(self, grid, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Per-node factor c_i with E_t[int S43(T-s)/S44(T-t) dA_s] = c_i (times I_t if rate-driven)."""
        grid = validate_grid(grid)
        T = self.horizon
        return self.predictor.unit_integrals(grid, lambda ti, s: self.coeffs.row4_kernel(T - ti, T - s), tol)

    def adjoint_Z(self, t: float, X, Y, u, rate: float | None = None) -> float:
        """Adjoint value Z_t = -(S41 X + S42 Y + S43 u)/S44 - E_t[int S43(T-s)/S44(T-t) dA_s]/(2 lambda)."""
        tau = float(self._tau(t))
        r = self.coeffs(tau).s_ratio
        pred = 0.0
        if tau > 0.0:
            pred = self.predictor.expected_weighted_increments(
                float(t), lambda s: self.coeffs.row4_kernel(tau, self.horizon - s), rate)
        return float(-(r[0] * X + r[1] * Y + r[2] * u) - pred / (2 * self.params.lambda_temp))

    def state(self, t: float, X: float, Y: float, rate: float | None = None) -> ClosedLoopState:
        u = float(self.rate(t, X, Y, rate))
        z = self.zeta(t, rate)
        return ClosedLoopState(float(t), float(X), float(Y), z, u, self.adjoint_Z(t, X, Y, u, rate))


def zeta_hat(t: float, law: FeedbackLaw, rate: float | None = None) -> float:
    return law.zeta(t, rate)


def feedback_rate(t: float, X, Y, law: FeedbackLaw, rate: float | None = None):
    return law.rate(t, X, Y, rate)


def B_matrix(t, coeffs: CoefficientSet, params: ModelParams) -> np.ndarray:
    """Closed-loop matrix ((-v0v1, -v0v2), (gamma v0v1, gamma v0v2 - rho)), shape (..., 2, 2)."""
    c = coeffs(params.horizon - np.asarray(t, dtype=float))
    a, b = np.asarray(c.v0v1), np.asarray(c.v0v2)
    out = np.empty(a.shape + (2, 2))
    out[..., 0, 0] = -a
    out[..., 0, 1] = -b
    out[..., 1, 0] = params.gamma * a
    out[..., 1, 1] = params.gamma * b - params.rho
    return out


@dataclass(frozen=True)
class FundamentalSolution:
    grid: np.ndarray
    Phi: np.ndarray  # (N+1, 2, 2)
    Phi_inv: np.ndarray
    b: np.ndarray

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.Phi)


def fundamental_solution(grid, coeffs: CoefficientSet, params: ModelParams) -> FundamentalSolution:
    """Classical RK4 for Phi' = B(t) Phi, Phi(0) = I, on the given grid."""
    grid = validate_grid(grid)
    h = np.diff(grid)
    B_node = B_matrix(grid, coeffs, params)
    B_mid = B_matrix(grid[:-1] + 0.5 * h, coeffs, params)
    Phi = np.empty((grid.size, 2, 2))
    Phi[0] = np.eye(2)
    for i in range(h.size):
        P = Phi[i]
        k1 = B_node[i] @ P
        k2 = B_mid[i] @ (P + 0.5 * h[i] * k1)
        k3 = B_mid[i] @ (P + 0.5 * h[i] * k2)
        k4 = B_node[i + 1] @ (P + h[i] * k3)
        Phi[i + 1] = P + h[i] / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    det = np.linalg.det(Phi)
    if np.any(np.abs(det) < 1e-12):
        bad = int(np.argmax(np.abs(det) < 1e-12))
        raise SingularPhi(f"|det Phi| < 1e-12 at t = {grid[bad]:g}")
    return FundamentalSolution(grid, Phi, np.linalg.inv(Phi), np.array([-1.0, params.gamma]))


def liouville_error(fund: FundamentalSolution, coeffs: CoefficientSet, params: ModelParams,
                    tol: float = 1e-12) -> float:
    """max_t |det Phi(t) / exp(int_0^t tr B) - 1| with the trace integral by adaptive quadrature."""
    grid = fund.grid

    def trace(s, owner):
        B = B_matrix(s, coeffs, params)
        return B[..., 0, 0] + B[..., 1, 1]

    steps = integrate(trace, grid[:-1], grid[1:], tol=tol)
    log_det = np.concatenate([[0.0], np.cumsum(steps)])
    return float(np.max(np.abs(fund.det / np.exp(log_det) - 1.0)))


def optimal_trajectory_deterministic(law: FeedbackLaw, fund: FundamentalSolution,
                                     path: SignalPath | None = None, signal=None) -> Trajectory:
    """(X, Y)(t) = Phi(t) ((x, y) + int_0^t zeta_s Phi^-1(s) b ds), trapezoid in s.

    The intercept must be deterministic: pass the (noise-free) ``path`` when the
    predictor is driven by the current rate, or the deterministic ``signal``.
    """
    grid = fund.grid
    p = law.params
    if path is not None:
        if not np.array_equal(path.grid, grid):
            raise ValueError("signal path and fundamental solution use different grids")
        rates = path.rate
    elif signal is not None:
        rates = signal.rates(grid)[0]
    elif law.predictor.rate_proportional:
        raise ValueError("a rate-driven predictor needs the deterministic signal path")
    else:
        rates = np.zeros(grid.size)
    sched = law.schedule(grid)
    zeta = sched.zeta(np.arange(grid.size), rates) + sched.offset
    integrand = zeta[:, None] * (fund.Phi_inv @ fund.b)
    dt = np.diff(grid)[:, None]
    acc = np.concatenate([np.zeros((1, 2)), np.cumsum(0.5 * dt * (integrand[:-1] + integrand[1:]), axis=0)])
    xy = np.einsum("nij,nj->ni", fund.Phi, np.array([p.x0, p.y0]) + acc)
    X, Y = xy[:, 0], xy[:, 1]
    u = sched.kx * X + sched.ky * Y + zeta
    u[-1] = terminal_rate(X[-1], Y[-1], p)
    A = trapezoid_cumulative(grid, np.asarray(rates, dtype=float))
    inc = np.diff(A)
    c = cost_components(grid, X, Y, u[:-1], inc, p)
    costs = dataclasses.replace(c, **{f.name: float(getattr(c, f.name)) for f in dataclasses.fields(c)})
    return Trajectory(grid, np.asarray(rates, dtype=float).copy(), A, X, Y, u, sched.zeta(np.arange(grid.size), rates),
                      costs)


def reference_strategies(params: ModelParams, signal, kappa_small: float = 1e-4,
                         floor: float = DEFAULT_FLOOR) -> tuple[FeedbackLaw, FeedbackLaw]:
    """(no_signal_law, temporary_only_law).

    The temporary-only law is the optimal law for kappa -> kappa_small, used as
    a proxy for the purely temporary impact limit.
    """
    no_signal = FeedbackLaw.build(params, ZeroSignal(), name="no_signal", floor=floor)
    small = params.with_(kappa=kappa_small)
    chk = check_assumption(small, floor=floor)
    if not chk.holds:
        raise AssumptionViolated(f"kappa_small = {kappa_small:g} violates the invertibility condition")
    return no_signal, FeedbackLaw.build(small, signal, name="temporary_only", floor=floor)


__all__ = [
    "FeedbackLaw", "LawSchedule", "ClosedLoopState", "FundamentalSolution", "SingularPhi",
    "zeta_hat", "feedback_rate", "B_matrix", "fundamental_solution", "liouville_error",
    "optimal_trajectory_deterministic", "reference_strategies",
]
