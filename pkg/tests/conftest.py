import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cosshell.cosserat3d import MaterialParams

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def mat():
    return MaterialParams(mu=1.3, lam=0.7, mu_c=0.4, L_c=0.8, a1=1.1, a2=0.9, a3=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("ab:"))):
        terminalreporter.write_line(line)
