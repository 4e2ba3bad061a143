import os

# keep test runs single-threaded so timings are comparable across machines
os.environ.setdefault("WEHRL_LAB_THREADS", "1")

# one (number, passed, detail) entry per acceptance criterion, filled by test_acceptance
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
