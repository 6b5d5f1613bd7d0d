import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "nodal3d", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "nodal3d"))


@pytest.fixture(scope="session")
def ensemble_cache():
    from nodal3d.harness.ensemble import EnsembleCache
    return EnsembleCache()


_CRITERION_LINES = []


@pytest.fixture(scope="session")
def criterion_lines():
    return _CRITERION_LINES


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)
