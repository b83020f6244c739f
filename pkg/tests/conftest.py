import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.outcome != "passed")
    prev = _acceptance.get(n, (title, True, 0.0))
    ok = prev[1] and not failed and not (rep.when == "call" and rep.skipped)
    dur = prev[2] + rep.duration
    _acceptance[n] = (title, ok, dur)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_acceptance):
        title, ok, dur = _acceptance[n]
        tr.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}  ({dur:.1f} s)")
