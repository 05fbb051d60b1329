import pytest

ACCEPTANCE = {}
CRITERIA = range(1, 11)


@pytest.fixture
def record():
    """Store one acceptance verdict; the summary prints a PASS/FAIL line per criterion."""

    def _record(number: int, passed: bool, detail: str = "") -> bool:
        prev = ACCEPTANCE.get(number)
        ok = bool(passed) and (prev is None or prev[0])
        details = [d for d in ((prev[1] if prev else ""), detail) if d]
        ACCEPTANCE[number] = (ok, "; ".join(details))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: FAIL  (not run or raised before recording)")
