"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

import pytest

RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")
    config.stash[RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.skipped:
        return
    number, title = mark.args
    results = item.config.stash[RESULTS]
    ok = results.get(number, (title, True, 0.0))[1] and report.passed
    seconds = report.duration if report.when == "call" else results.get(number, (title, ok, 0.0))[2]
    results[number] = (title, ok, seconds)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, seconds = results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {title} ({seconds:.2f}s)")
