import pytest

_LINES: dict = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        status = "PASS" if passed else "FAIL"
        _LINES[number] = f"criterion {number:>2} {status}  {title}" + (f"  [{detail}]" if detail else "")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
