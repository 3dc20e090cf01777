"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_LABELS: dict[int, str] = {}
_OUTCOMES: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            number, label = m.args
            _LABELS[number] = label
            item.user_properties.append(("criterion", number))


@pytest.hookimpl(trylast=True)
def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES.setdefault(number, []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _LABELS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LABELS):
        runs = _OUTCOMES.get(number, [])
        status = "PASS" if runs and all(runs) else ("NOT RUN" if not runs else "FAIL")
        terminalreporter.write_line(f"criterion {number}: {status}  {_LABELS[number]}")
