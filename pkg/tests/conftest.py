import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qobserver.bench import load_scenario, run_table

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def anti():
    return load_scenario("anti-harmonic")


@pytest.fixture(scope="session")
def harm():
    return load_scenario("harmonic")


@pytest.fixture(scope="session")
def anti_table(anti):
    return run_table(anti)


@pytest.fixture(scope="session")
def harm_table(harm):
    return run_table(harm)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
