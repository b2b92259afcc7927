import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    number = int(report.nodeid.split("::test_criterion_")[1].split("_")[0])
    if report.failed:
        _CRITERIA[number] = "FAIL"
    elif report.when == "call" and number not in _CRITERIA:
        _CRITERIA[number] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {number}: {_CRITERIA[number]}")
