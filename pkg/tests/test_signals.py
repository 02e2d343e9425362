from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptive_liquidation.model import REFERENCE_PARAMS, CoefficientSet, S_row4, G_vec, build_eigen_system
from adaptive_liquidation.quadrature import simpson
from adaptive_liquidation.signals import (
    REFERENCE_SIGNAL,
    DeterministicSignal,
    InvalidGrid,
    OUSignal,
    OUSignalParams,
    SignalPath,
    ZeroSignal,
    make_grid,
    make_predictor,
    ou_kernels,
    simulate_ou_paths,
    simulate_ou_rates,
)

T = REFERENCE_PARAMS.horizon


@pytest.fixture(scope="module")
def coeffs():
    return CoefficientSet(REFERENCE_PARAMS, build_eigen_system(REFERENCE_PARAMS))


class TestGridAndPaths:
    def test_bad_grids(self):
        for g in ([0.0], [0.0, 1.0, 1.0], [0.5, 1.0], [0.0, 2.0, 1.0]):
            with pytest.raises(InvalidGrid):
                simulate_ou_paths(REFERENCE_SIGNAL, g, 1, 0)
        with pytest.raises(InvalidGrid):
            make_grid(1.0, 0)

    def test_consistency(self):
        g = make_grid(T, 100)
        for path in simulate_ou_paths(REFERENCE_SIGNAL, g, 5, seed=9):
            assert path.cumulative[0] == 0.0
            np.testing.assert_array_equal(np.diff(path.cumulative), path.increments)
            assert path.rate.shape == g.shape and path.increments.shape == (100,)

    def test_sigma_zero_is_exact_mean(self):
        g = make_grid(T, 2000)
        ou = OUSignalParams(1.0, 0.1, 0.0)
        r = simulate_ou_rates(ou, g, 1, seed=4)[0]
        np.testing.assert_array_equal(r, np.exp(-0.1 * g))
        a = SignalPath.from_rates(g, r)
        b = SignalPath.from_rates(g, DeterministicSignal.exponential(1.0, 0.1).rates(g)[0])
        for f in ("grid", "rate", "increments", "cumulative"):
            assert getattr(a, f).tobytes() == getattr(b, f).tobytes()

    def test_substreams_independent_of_batching(self):
        g = make_grid(T, 50)
        whole = simulate_ou_rates(REFERENCE_SIGNAL, g, 10, seed=5)
        parts = np.vstack([simulate_ou_rates(REFERENCE_SIGNAL, g, 4, 5, 0), simulate_ou_rates(REFERENCE_SIGNAL, g, 6, 5, 4)])
        np.testing.assert_array_equal(whole, parts)

    def test_moments(self):
        g = make_grid(T, 20)
        n = 100_000
        r = simulate_ou_rates(REFERENCE_SIGNAL, g, n, seed=11)
        mid = r[:, 10]
        se = mid.std(ddof=1) / np.sqrt(n)
        assert abs(mid.mean() - np.exp(-0.5)) <= 3 * se
        var_ref = REFERENCE_SIGNAL.variance(T)
        assert abs(r[:, -1].var(ddof=1) / var_ref - 1) <= 0.05

    def test_param_validation(self):
        with pytest.raises(ValueError):
            OUSignalParams(1.0, 0.0, 0.5)
        with pytest.raises(ValueError):
            OUSignalParams(1.0, 0.1, -0.5)


class TestPredictors:
    def test_zero(self):
        pred = make_predictor(ZeroSignal(), T)
        assert pred.expected_weighted_increments(3.0, lambda s: np.exp(s)) == 0.0

    @given(st.floats(-5, 5), st.floats(0, T))
    def test_constant_rate(self, c, t):
        pred = make_predictor(DeterministicSignal.constant(c), T)
        assert pred.expected_weighted_increments(t, lambda s: np.ones_like(s)) == pytest.approx(c * (T - t), abs=1e-9)

    def test_ou_markov(self):
        pred = make_predictor(OUSignal(REFERENCE_SIGNAL), T)
        w = lambda s: np.cos(s)
        a = pred.expected_weighted_increments(2.0, w, rate=0.7)
        b = pred.expected_weighted_increments(2.0, w, rate=0.7)
        assert a == b
        assert pred.expected_weighted_increments(2.0, w, rate=0.0) == 0.0
        with pytest.raises(ValueError):
            pred.expected_weighted_increments(2.0, w)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 9.9))
    def test_linearity(self, a, b, t):
        pred = make_predictor(DeterministicSignal.exponential(1.0, 0.3), T)
        w1, w2 = (lambda s: np.sin(s)), (lambda s: s**2 / 50)
        lhs = pred.expected_weighted_increments(t, lambda s: a * w1(s) + b * w2(s))
        rhs = a * pred.expected_weighted_increments(t, w1) + b * pred.expected_weighted_increments(t, w2)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_ou_closed_form(self):
        pred = make_predictor(OUSignal(REFERENCE_SIGNAL), T)
        val = pred.expected_weighted_increments(4.0, lambda s: np.ones_like(s), rate=2.0)
        assert val == pytest.approx(2.0 * (1 - np.exp(-0.1 * 6.0)) / 0.1, rel=1e-12)


class TestKernels:
    def test_terminal(self, coeffs):
        assert ou_kernels(T, coeffs, 0.1) == (0.0, 0.0)

    def test_simpson_oracle(self, coeffs):
        eig = coeffs.eig
        s = np.linspace(0.0, T, 100_001)
        S4, G = S_row4(T - s, eig), G_vec(T - s, eig)
        k1 = simpson(np.exp(-0.1 * s) * S4[:, 2], s) / S_row4(T, eig)[3]
        k2 = simpson(np.exp(-0.1 * s) * G[:, 2], s) / G_vec(T, eig)[2]
        got = ou_kernels(0.0, coeffs, 0.1)
        assert abs(got[0] - k1) <= 1e-8 and abs(got[1] - k2) <= 1e-8

    def test_fast_reversion(self, coeffs):
        k1, k2 = ou_kernels(0.0, coeffs, 1e6)
        assert abs(k1) <= 1e-4 and abs(k2) <= 1e-4
        # the boundary layer is resolved, not skipped: int_0^inf e^{-beta s} ds = 1/beta
        assert k2 == pytest.approx(1e-6, rel=1e-3)

    def test_predictor_reproduces_k1(self, coeffs):
        eig = coeffs.eig
        pred = make_predictor(OUSignal(REFERENCE_SIGNAL), T)
        for t in (0.0, 3.0, 8.0):
            s44 = S_row4(T - t, eig)[3]
            w = lambda s: S_row4(T - s, eig)[..., 2] / s44
            rate = 1.7
            assert pred.expected_weighted_increments(t, w, rate) / rate == pytest.approx(
                ou_kernels(t, coeffs, 0.1)[0], abs=1e-8)
