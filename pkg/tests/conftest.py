import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance line; the summary is printed after the run."""

    def _record(number: int, title: str, passed: bool, detail: str, elapsed: float):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail} ({elapsed:.1f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
