import pytest

_ACCEPTANCE = []
_NOTES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(tag, ok, detail)``."""

    def record(tag, ok, detail=""):
        _ACCEPTANCE.append((tag, bool(ok), detail))
        return ok

    return record


@pytest.fixture
def note():
    """Record an informational line that is reported but not asserted."""

    def record(tag, detail):
        _NOTES.append((tag, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not (_ACCEPTANCE or _NOTES):
        return
    terminalreporter.section("acceptance criteria")
    for tag, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}")
    for tag, detail in _NOTES:
        terminalreporter.write_line(f"[INFO] {tag}: {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20160601)
