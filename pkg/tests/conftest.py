from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from adaptive_liquidation.model import REFERENCE_PARAMS, ModelParams

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

positive = st.floats(min_value=1e-3, max_value=100.0, allow_nan=False, allow_infinity=False)


@st.composite
def model_params(draw, max_horizon: float = 100.0):
    lam, gam, kap, rho, vr, phi = (draw(positive) for _ in range(6))
    T = draw(st.floats(min_value=1e-2, max_value=max_horizon))
    return ModelParams(lam, gam, kap, rho, vr, phi, T, x0=1.0, y0=0.0)


@pytest.fixture
def ref():
    return REFERENCE_PARAMS


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
