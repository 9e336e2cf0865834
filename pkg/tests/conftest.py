"""Terminal reporting for the acceptance suite.

Each test in test_acceptance.py is one acceptance criterion; after the run
a one-line PASS/FAIL verdict per criterion is printed.
"""

from __future__ import annotations

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[name].upper()
        label = name.replace("test_", "", 1).replace("_", " ")
        terminalreporter.write_line(f"[{outcome:>7}] {label}")
