import time

import pytest

# criterion number -> (passed, summary line); filled by tests/test_acceptance.py
ACCEPTANCE = {}


class Criterion:
    """Times one acceptance criterion and records its outcome."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.start = time.perf_counter()

    def elapsed(self):
        return time.perf_counter() - self.start

    def record(self, passed, measured, budget=None):
        secs = self.elapsed()
        in_time = budget is None or secs < budget
        ok = bool(passed) and in_time
        clock = f"{secs:.1f}s" if budget is None else f"{secs:.1f}s / {budget:g}s"
        ACCEPTANCE[self.number] = (ok, f"{self.title}: {measured} [{clock}]")
        return ok, in_time


@pytest.fixture
def criterion(request):
    """``criterion(number, title)`` starts the clock for one criterion."""
    made = []

    def start(number, title):
        c = Criterion(number, title)
        made.append(c)
        return c

    yield start
    for c in made:
        if c.number not in ACCEPTANCE:
            ACCEPTANCE[c.number] = (False, f"{c.title}: raised before a result was recorded")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}  {'PASS' if ok else 'FAIL'}  {line}")
