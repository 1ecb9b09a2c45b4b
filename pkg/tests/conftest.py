import math

import pytest
from hypothesis import HealthCheck, settings

from berrytherm.core import PhysicalParams

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_PI = 2 * math.pi

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_report():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def ref_params() -> PhysicalParams:
    """lambda = 1.2 kHz and omega = Omega = 1 MHz, all converted to rad/s."""
    return PhysicalParams(TWO_PI * 1.2e3, TWO_PI * 1e6, TWO_PI * 1e6)


@pytest.fixture(scope="session")
def ref_frame(ref_params):
    from berrytherm.diagonalization import inverse_solve

    return inverse_solve(ref_params)


FIG2_PANELS = [
    (1e6, 1e-3),
    (1e7, 1e-2),
    (1e8, 0.1),
    (1e9, 1.0),
]
