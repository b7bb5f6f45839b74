import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict line; printed again in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = "criterion %2d: %s  %s" % (number, "PASS" if ok else "FAIL", detail)
        print(line)
        request.config._acceptance_lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
