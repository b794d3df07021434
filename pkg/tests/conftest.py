import math

import numpy as np
import pytest
from hypothesis import strategies as st

from spinbath.model import EnvironmentRealization, SystemCoefficients


def random_env(rng, n, g_low=0.1, g_high=2.0, phases=True):
    alpha_sq = rng.random(n)
    g = rng.uniform(g_low, g_high, n)
    pa = rng.uniform(0, 2 * math.pi, n) if phases else None
    pb = rng.uniform(0, 2 * math.pi, n) if phases else None
    return EnvironmentRealization.from_arrays(alpha_sq, g, pa, pb)


def random_system(rng):
    theta = rng.uniform(0.05, math.pi / 2 - 0.05)
    phi = rng.uniform(0, 2 * math.pi)
    return SystemCoefficients(math.cos(theta), math.sin(theta) * complex(math.cos(phi), math.sin(phi)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


alpha_sq_st = st.floats(0.0, 1.0)
g_st = st.floats(1e-3, 10.0)
t_st = st.floats(-50.0, 50.0)


@st.composite
def envs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    a = draw(st.lists(alpha_sq_st, min_size=n, max_size=n))
    g = draw(st.lists(g_st, min_size=n, max_size=n))
    return EnvironmentRealization.from_arrays(a, g)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
