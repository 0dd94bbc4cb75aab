import pytest

CRITERIA_LINES: list[str] = []


@pytest.fixture
def record_line():
    def rec(label: str, result):
        line = f"{label} {result.line()}"
        CRITERIA_LINES.append(line)
        print(line)
        return result
    return rec


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
