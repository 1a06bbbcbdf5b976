import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from unifinsler.linalg import exp_skew
from unifinsler.sampling import random_skew, random_unitary

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_lines():
    return ACCEPTANCE_LINES


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=6)


def unitary(n, seed):
    return random_unitary(n, np.random.default_rng(seed))


def skew(n, seed, norm=None):
    return random_skew(n, np.random.default_rng(seed), norm=norm)


def near(w, radius, seed):
    """Point of B_inf[w, radius] at distance exactly ``radius`` times a uniform factor."""
    rng = np.random.default_rng(seed)
    return w @ exp_skew(random_skew(w.shape[0], rng, norm=radius * rng.uniform()))
