from collections import OrderedDict

import pytest

_ACCEPTANCE = OrderedDict()


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance check.

    ``criterion(n, ok, detail)`` stores a line for the end-of-run summary and
    fails the test when ``ok`` is false.
    """

    def record(number, ok, detail):
        _ACCEPTANCE.setdefault(number, []).append((bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"criterion {number} not met: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[number]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
