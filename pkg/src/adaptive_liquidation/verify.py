"""Invariant and oracle checks bundled for the ``verify`` command."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .controller import FeedbackLaw, fundamental_solution, liouville_error, optimal_trajectory_deterministic
from .model import (
    G_vec,
    ModelParams,
    S_row4,
    build_eigen_system,
    check_assumption,
    expm_S,
    log_neg_G3,
    log_S44,
    matrix_L,
)
from .oracle import (
    DiscreteProblem,
    discretized_closed_form,
    fbsde_residual,
    gateaux_residual,
    smooth_directions,
    solve_foc,
)
from .signals import make_grid


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_eigen(params: ModelParams) -> CheckResult:
    eig = build_eigen_system(params)
    r2 = params.rho**2
    margin = min(r2 - eig.nu1**2, eig.nu3**2 - r2)
    resid = eig.decomposition_residual() / np.max(np.abs(eig.matL))
    ok = (eig.nu1 < 0 and eig.nu3 < 0 and abs(eig.nu1) < abs(eig.nu3) and eig.c1 > eig.c2 > 0
          and margin >= -1e-12 and resid <= 1e-9)
    return CheckResult("eigen system", ok, f"nu1={eig.nu1!r} nu3={eig.nu3!r} margin={margin:.3e} "
                                           f"|L-UDU^-1|/|L|={resid:.2e}")


def relative_error(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def check_expm(params: ModelParams, taus=None) -> CheckResult:
    eig = build_eigen_system(params)
    L = matrix_L(params)
    taus = np.linspace(0.0, params.horizon, 11) if taus is None else np.asarray(taus)
    taus = taus[eig.growth * taus <= 700]
    e1 = e2 = e3 = 0.0
    row = np.array([params.varrho / params.lambda_temp, -params.kappa / (2 * params.lambda_temp), -1.0, 0.0])
    for tau in taus:
        ref = scipy.linalg.expm(L * tau)
        S = expm_S(float(tau), eig)
        e1 = max(e1, relative_error(S, ref))
        e2 = max(e2, relative_error(S_row4(tau, eig), S[3]))
        e3 = max(e3, relative_error(G_vec(tau, eig), row @ S))
    ok = e1 <= 1e-8 and e2 <= 1e-9 and e3 <= 1e-9
    return CheckResult("matrix exponential", ok, f"vs scipy {e1:.2e}, S row 4 {e2:.2e}, G {e3:.2e}")


def check_lemma_bounds(params: ModelParams, grid_n: int = 1001) -> CheckResult:
    eig = build_eigen_system(params)
    tau = np.linspace(0.0, params.horizon, grid_n)
    lS = log_S44(tau, eig)
    lG = log_neg_G3(tau, eig)
    ok = bool(np.all(lS >= -1e-10) and np.all(np.diff(lS) >= -1e-10) and np.all(lG >= -1e-10))
    return CheckResult("S44 >= 1 nondecreasing, G3 <= -1", ok,
                       f"min log S44={lS.min():.2e}, min step={np.diff(lS).min():.2e}, min log(-G3)={lG.min():.2e}")


def check_assumption_result(params: ModelParams, grid_n: int = 1001) -> CheckResult:
    chk = check_assumption(params, grid_n)
    return CheckResult("invertibility condition", chk.holds,
                       f"min |G3 S44 - G4 S43| = {chk.min_gap:.6g} at tau = {chk.tau_at_min:g}")


def relative_l2(u, ref, dt) -> float:
    return float(np.sqrt(np.sum(dt * (u - ref) ** 2) / np.sum(dt * ref**2)))


def closed_form_on_grid(params: ModelParams, signal, n_steps: int):
    law = FeedbackLaw.build(params, signal)
    grid = make_grid(params.horizon, n_steps)
    fund = fundamental_solution(grid, law.coeffs, params)
    return law, fund, optimal_trajectory_deterministic(law, fund, signal=signal)


def check_oracle(params: ModelParams, signal, n_steps: int, label: str) -> list[CheckResult]:
    prob = DiscreteProblem.from_signal(params, n_steps, signal)
    sol = solve_foc(prob)
    _, _, traj = closed_form_on_grid(params, signal, n_steps)
    u_cf = discretized_closed_form(traj)
    err = relative_l2(u_cf, sol.u_star, prob.dt)
    gap = abs(prob.cost(u_cf) - sol.cost) / max(abs(sol.cost), 1e-300)
    dirs = smooth_directions(prob.grid, 100, seed=0)
    g_cf = max(abs(gateaux_residual(prob, u_cf, a)) for a in dirs)
    g_opt = max(abs(gateaux_residual(prob, sol.u_star, a)) for a in dirs)
    return [
        CheckResult(f"oracle rate [{label}]", err <= 2e-2, f"relative L2 = {err:.3e} at N = {n_steps}"),
        CheckResult(f"oracle cost [{label}]", gap <= 1e-3, f"|dJ|/|J| = {gap:.3e}, J* = {sol.cost!r}"),
        CheckResult(f"Gateaux residual [{label}]", g_cf <= 5e-3 and g_opt <= 1e-8,
                    f"closed form {g_cf:.2e}, oracle optimum {g_opt:.2e}"),
    ]


def check_fbsde(params: ModelParams, signal, n_steps: int, label: str) -> CheckResult:
    law, _, traj = closed_form_on_grid(params, signal, n_steps)
    rep = fbsde_residual(traj, law)
    norm = rep.normalized()
    return CheckResult(f"adjoint system [{label}]", rep.passes(5e-3),
                       ", ".join(f"{k}={v:.2e}" for k, v in norm.items()))


def check_liouville(params: ModelParams, n_steps: int) -> CheckResult:
    law = FeedbackLaw.build(params)
    grid = make_grid(params.horizon, n_steps)
    fund = fundamental_solution(grid, law.coeffs, params)
    err = liouville_error(fund, law.coeffs, params)
    ok = err <= 1e-6 and np.array_equal(fund.Phi[0], np.eye(2)) and bool(np.all(np.abs(fund.det) > 0))
    return CheckResult("Liouville", ok, f"max |det Phi / exp(int tr B) - 1| = {err:.2e}")


def run_all(params: ModelParams, deterministic_signal, grid_steps: int = 2000,
            oracle_steps: int = 800, grid_n: int = 1001) -> list[CheckResult]:
    from .signals import ZeroSignal

    out = [check_eigen(params), check_expm(params), check_lemma_bounds(params, grid_n),
           check_assumption_result(params, grid_n)]
    if not out[-1].passed:
        return out
    scenarios = [("zero signal", ZeroSignal())]
    if deterministic_signal is not None and not isinstance(deterministic_signal, ZeroSignal):
        scenarios.append(("deterministic signal", deterministic_signal))
    for label, sig in scenarios:
        out += check_oracle(params, sig, oracle_steps, label)
        out.append(check_fbsde(params, sig, grid_steps, label))
    out.append(check_liouville(params, grid_steps))
    return out
