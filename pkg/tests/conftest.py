"""Per-criterion pass/fail summary for tests marked ``criterion(n)``."""
from collections import defaultdict

_criterion_of = {}
_outcomes = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criterion_of[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    number = _criterion_of.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[number].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        verdict = "PASS" if all(results) else "FAIL"
        detail = f" ({sum(results)}/{len(results)} checks)" if len(results) > 1 else ""
        terminalreporter.write_line(f"criterion {number}: {verdict}{detail}")
