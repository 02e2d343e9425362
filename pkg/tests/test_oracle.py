from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptive_liquidation.controller import FeedbackLaw, fundamental_solution, optimal_trajectory_deterministic
from adaptive_liquidation.model import REFERENCE_PARAMS
from adaptive_liquidation.oracle import (
    DiscreteProblem,
    NotNegativeDefinite,
    OracleViolation,
    check_candidate,
    discrete_gradient,
    discretized_closed_form,
    fbsde_residual,
    gateaux_residual,
    smooth_direction_functions,
    smooth_directions,
    solve_foc,
)
from adaptive_liquidation.signals import DeterministicSignal, SignalPath, make_grid
from adaptive_liquidation.simulator import simulate_closed_loop

from conftest import model_params

P = REFERENCE_PARAMS
T = P.horizon
OU_MEAN = DeterministicSignal.exponential(1.0, 0.1)


def closed_form(params, n, signal=None):
    law = FeedbackLaw.build(params, signal)
    fund = fundamental_solution(make_grid(params.horizon, n), law.coeffs, params)
    return law, optimal_trajectory_deterministic(law, fund, signal=signal)


def rel_l2(u, ref, dt):
    return np.sqrt(np.sum(dt * (u - ref) ** 2) / np.sum(dt * ref**2))


class TestProblem:
    def test_rejects_small_and_large(self):
        with pytest.raises(ValueError):
            DiscreteProblem.from_signal(P, 1)
        with pytest.raises(ValueError):
            DiscreteProblem.from_signal(P, 50, max_n=40)

    def test_hessian_symmetric(self):
        H, _, _ = DiscreteProblem.from_signal(P, 120, OU_MEAN).quadratic
        assert np.max(np.abs(H - H.T)) == 0.0

    def test_quadratic_matches_cost(self, rng):
        prob = DiscreteProblem.from_signal(P.with_(y0=0.7), 60, OU_MEAN)
        for _ in range(5):
            u = rng.normal(size=60)
            assert prob.cost_quadratic(u) == pytest.approx(prob.cost(u), rel=1e-11, abs=1e-11)

    def test_cost_matches_simulator(self):
        g = make_grid(T, 80)
        path = SignalPath.from_rates(g, OU_MEAN.rates(g)[0])
        tr = simulate_closed_loop(FeedbackLaw.build(P, OU_MEAN), path)
        assert DiscreteProblem.from_path(P, path).cost(tr.u_steps) == pytest.approx(tr.reduced_cost, rel=1e-13)


class TestGradient:
    def test_trivial_origin(self):
        prob = DiscreteProblem.from_signal(P.with_(x0=0.0, y0=0.0), 30)
        assert np.all(discrete_gradient(prob, np.zeros(30)) == 0.0)

    @settings(max_examples=15)
    @given(model_params(max_horizon=20.0), st.integers(0, 2**32 - 1))
    def test_finite_differences(self, params, seed):
        rng = np.random.default_rng(seed)
        n = 50
        g = make_grid(params.horizon, n)
        prob = DiscreteProblem.from_path(params, SignalPath.from_rates(g, rng.normal(size=n + 1)))
        u = rng.normal(size=n)
        grad = discrete_gradient(prob, u)
        h = 1e-4 * max(1.0, np.max(np.abs(u)))
        fd = np.array([(prob.cost(u + h * e) - prob.cost(u - h * e)) / (2 * h) for e in np.eye(n)])
        scale = max(np.max(np.abs(grad)), 1e-300)
        assert np.max(np.abs(fd - grad)) <= 1e-6 * scale + 1e-9 * abs(prob.cost(u)) / h

    def test_recursion_equals_quadratic(self, rng):
        prob = DiscreteProblem.from_signal(P.with_(y0=1.3), 100, OU_MEAN)
        u = rng.normal(size=100)
        np.testing.assert_allclose(discrete_gradient(prob, u), discrete_gradient(prob, u, "quadratic"),
                                   rtol=1e-10, atol=1e-12)

    def test_bad_method(self):
        with pytest.raises(ValueError):
            discrete_gradient(DiscreteProblem.from_signal(P, 5), np.zeros(5), "adjoint")

    def test_kappa_override_gradient(self, rng):
        prob = DiscreteProblem.from_signal(P, 40, OU_MEAN, kappa_override=0.0)
        u = rng.normal(size=40)
        np.testing.assert_allclose(discrete_gradient(prob, u), discrete_gradient(prob, u, "quadratic"),
                                   rtol=1e-10, atol=1e-12)
        assert prob.cost(u) == pytest.approx(prob.cost_quadratic(u), rel=1e-12)


class TestSolve:
    def test_foc(self):
        prob = DiscreteProblem.from_signal(P, 300, OU_MEAN)
        sol = solve_foc(prob)
        assert sol.grad_norm <= 1e-9 * sol.solver_stats["scale"]

    def test_trivial_solution(self):
        sol = solve_foc(DiscreteProblem.from_signal(P.with_(x0=0.0, y0=0.0), 50))
        assert np.all(sol.u_star == 0.0)

    def test_not_negative_definite(self):
        prob = DiscreteProblem.from_signal(P, 20)
        H, g, c = prob.quadratic
        prob.__dict__["quadratic"] = (-H, g, c)
        with pytest.raises(NotNegativeDefinite):
            solve_foc(prob)

    @settings(max_examples=20)
    @given(model_params(max_horizon=20.0))
    def test_always_negative_definite(self, params):
        solve_foc(DiscreteProblem.from_signal(params, 40))

    def test_closed_form_convergence(self):
        errs = []
        for n in (100, 200, 400, 800):
            prob = DiscreteProblem.from_signal(P, n)
            _, tr = closed_form(P, n)
            errs.append(rel_l2(discretized_closed_form(tr), solve_foc(prob).u_star, prob.dt))
        assert errs[1] <= 2e-2
        assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))

    def test_candidate_check(self, rng):
        prob = DiscreteProblem.from_signal(P, 80, OU_MEAN)
        sol = solve_foc(prob)
        assert check_candidate(prob, sol, sol.u_star + 0.01 * rng.normal(size=80)) < sol.cost
        fake = type(sol)(sol.u_star, sol.cost - 1.0, sol.grad_norm)
        with pytest.raises(OracleViolation):
            check_candidate(prob, fake, sol.u_star)


class TestGateaux:
    def test_at_optimum(self):
        prob = DiscreteProblem.from_signal(P, 400, OU_MEAN)
        sol = solve_foc(prob)
        assert max(abs(gateaux_residual(prob, sol.u_star, a)) for a in smooth_directions(prob.grid, 100, 1)) <= 1e-8

    def test_quadratic_expansion(self, rng):
        prob = DiscreteProblem.from_signal(P, 200, OU_MEAN)
        sol = solve_foc(prob)
        H, _, _ = prob.quadratic
        for _ in range(5):
            a = rng.normal(size=200)
            from adaptive_liquidation.oracle import directional_derivative
            d = directional_derivative(prob, sol.u_star + a, a)
            assert d == pytest.approx(a @ H @ a, rel=1e-8)
            assert d < 0

    def test_directions_bounded(self):
        fs = smooth_direction_functions(T, 10, seed=2)
        t = np.linspace(0, T, 20001)
        for f in fs:
            assert np.max(np.abs(f(t))) == pytest.approx(1.0, abs=1e-3)
        a = smooth_directions(make_grid(T, 50), 3, seed=2)
        b = smooth_directions(make_grid(T, 50), 3, seed=2)
        assert a.shape == (3, 50) and np.array_equal(a, b)


@pytest.fixture(scope="module")
def reports():
    out = {}
    for n in (1000, 2000):
        law, tr = closed_form(P, n)
        out[n] = (fbsde_residual(tr, law), fbsde_residual(tr, law, u_scale=1.1))
    return out


class TestFBSDE:
    def test_passes(self, reports):
        assert reports[2000][0].passes(5e-3)

    def test_first_order(self, reports):
        a, b = reports[1000][0].normalized(), reports[2000][0].normalized()
        for k in ("du", "dZ"):
            assert 1.8 <= a[k] / b[k] <= 2.2

    def test_terminal_adjoint_zero(self, reports):
        assert reports[2000][0].terminal_Z <= 1e-12

    def test_perturbation_detected(self, reports):
        pert = reports[2000][1]
        assert not pert.passes(5e-3)
        norm = pert.normalized()
        # a 10% rate error moves residual (i) by about 4x the tolerance, the others by more
        assert norm["du"] > 3 * 5e-3
        assert norm["dZ"] > 5 * 5e-3
        assert norm["terminal_u"] > 10 * 5e-3
