import pytest

from ctev.dispersion import eigenvalue_convergence

ETAS = [0.5**i for i in range(9)]

# filled by test_acceptance; echoed after the run so the verdicts show without -s
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sphere_study():
    return eigenvalue_convergence("sphere", 3.0, ETAS)


@pytest.fixture(scope="session")
def disk_study():
    return eigenvalue_convergence("disk", 3.0, ETAS)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
