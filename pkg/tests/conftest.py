import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'} {title}"
        if detail:
            line += f" ({detail})"
        _LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
