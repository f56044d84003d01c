import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hardylorentz import Signal

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance lines, filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")


def step_values(min_size=1, max_size=40, max_value=1e3):
    return st.lists(st.floats(-max_value, max_value, allow_nan=False, allow_infinity=False),
                    min_size=min_size, max_size=max_size)


@st.composite
def signals(draw, min_size=1, max_size=40):
    vals = draw(step_values(min_size, max_size))
    h = draw(st.sampled_from([1.0, 0.5, 1.0 / 64, 0.3]))
    return Signal(0.0, h, np.asarray(vals))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
