import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "joycekit", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("joycekit")

TWO_PI_I = 2j * math.pi


@pytest.fixture(scope="session")
def a1():
    from joycekit.models import a1_model

    return a1_model()


@pytest.fixture(scope="session")
def flat():
    from joycekit.models import flat_model

    return flat_model()


@pytest.fixture(scope="session")
def a2_state():
    from joycekit.models import A2State

    return A2State.from_qr(0.6 + 0.1j, 0.3 - 0.2j, 0.9 + 0.4j, 0.3 + 0.2j)


def complex_strategy(lo=-2.0, hi=2.0):
    from hypothesis import strategies as st

    part = st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
