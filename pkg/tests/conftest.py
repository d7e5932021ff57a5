import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from marketdyn import Economy

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_economy(rng, n_max=10, m_max=10, zero_frac=0.0):
    """Economy with v in [0.1, 10] and K in [0.5, 2]; sizes uniform in 1..max."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    V = rng.uniform(0.1, 10.0, (n, m))
    if zero_frac:
        drop = rng.random((n, m)) < zero_frac
        drop[np.arange(n), rng.integers(0, m, n)] = False
        V[drop] = 0.0
    K = rng.uniform(0.5, 2.0, n)
    return Economy.from_valuations(V, K)


def feasible_positive(econ, rng):
    """Random spending strictly positive on the support, row sums below K."""
    u = 1.0 - rng.random((econ.n, econ.m))
    u *= np.where(econ.support, 1.0, 0.0)
    frac = rng.uniform(0.05, 1.0, econ.n)
    return u / u.sum(axis=1, keepdims=True) * (econ.K * frac)[:, None]


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::test_criterion_" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                num = int(name.split("_")[2])
                lines.append((num, f"criterion {num}: {'PASS' if outcome == 'passed' else 'FAIL'}  ({name})"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
