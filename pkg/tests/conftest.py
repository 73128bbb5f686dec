import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record a one-line pass/fail verdict for the acceptance summary."""

    def _report(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


def assert_close(actual, expected, atol=1e-12, rtol=0.0):
    np.testing.assert_allclose(np.asarray(actual, float), np.asarray(expected, float), atol=atol, rtol=rtol)
