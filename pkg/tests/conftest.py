import re

_AC = re.compile(r"test_ac(\d+)_")
_results: dict = {}


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    failed = report.failed
    if report.when == "call" or failed:
        prev = _results.get(n, "PASS")
        _results[n] = "FAIL" if failed or prev == "FAIL" else ("SKIP" if report.skipped else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        terminalreporter.write_line(f"AC{n}: {_results[n]}")
