import pytest

from loadersim.layout import nominal_layout, nominal_scenario
from loadersim.machine import run_cycle


@pytest.fixture(scope="session")
def layout():
    return nominal_layout()


@pytest.fixture(scope="session")
def scenario():
    return nominal_scenario()


@pytest.fixture(scope="session")
def nominal_cycle(layout, scenario):
    """(trace, metrics) of the nominal short loading cycle, simulated once per session."""
    return run_cycle(layout, scenario)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
