"""Shared pytest wiring.

The acceptance suite records one line per criterion; the hook below prints
them in a dedicated section after the run, so they show up even though
pytest captures stdout during the tests themselves.
"""
import contextlib
import time

acceptance_lines = []


@contextlib.contextmanager
def criterion(name: str):
    """Record `name: pass/FAIL (elapsed)` no matter how the block exits."""
    t0 = time.monotonic()
    try:
        yield
    except BaseException:
        acceptance_lines.append(f"{name}: FAIL ({time.monotonic() - t0:.1f}s)")
        raise
    acceptance_lines.append(f"{name}: pass ({time.monotonic() - t0:.1f}s)")


def pytest_terminal_summary(terminalreporter):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines:
        terminalreporter.write_line(line)
