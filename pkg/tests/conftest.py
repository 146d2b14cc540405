"""Collects the outcome of every test marked ``criterion`` and prints one
pass/fail line per acceptance criterion at the end of the run."""

import pytest

_OUTCOMES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")
    config.stash[_OUTCOMES] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    ok = call.excinfo is None
    rows = item.config.stash[_OUTCOMES]
    prev = rows.get(number)
    rows[number] = (title, (prev[1] if prev else True) and ok, f"{call.duration:.1f}s", detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash[_OUTCOMES]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(rows):
        title, ok, elapsed, detail = rows[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {verdict}  {title} [{elapsed}] {detail}".rstrip())
