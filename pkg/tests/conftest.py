import pytest

_LINES = {}


@pytest.fixture
def acceptance():
    """``acceptance(k, ok, detail)`` records the verdict line for criterion ``k``."""
    def record(k: int, ok: bool, detail: str):
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES[k] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(_LINES):
        terminalreporter.write_line(_LINES[k])
