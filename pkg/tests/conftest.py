import sys
from pathlib import Path

import pytest

# test modules import the shared oracles as a top-level module
sys.path.insert(0, str(Path(__file__).parent))

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "passed": True, "seconds": 0.0, "detail": {}})
    entry["seconds"] += report.duration
    entry["passed"] = entry["passed"] and not report.failed
    if report.when == "call":
        entry["detail"].update(dict(item.user_properties))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        status = "PASS" if entry["passed"] else "FAIL"
        detail = ", ".join(f"{k}={_short(v)}" for k, v in entry["detail"].items())
        line = f"{status} criterion {number}: {entry['title']} ({entry['seconds']:.1f} s)"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))


def _short(value):
    return f"{value:.4g}" if isinstance(value, float) else str(value)
