import json
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from cantorcert import AffineIFS, GapSchedule, Interval
from cantorcert.cli import golden_path

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def mt():
    return AffineIFS.middle_thirds()


@pytest.fixture
def fat():
    return GapSchedule(Interval(0, 1), Fraction(1, 4), Fraction(1, 2))


@pytest.fixture
def golden():
    with open(golden_path()) as fh:
        return json.load(fh)


_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    prev = _CRITERIA.get(n, ("PASS", 0.0, title))
    ok = prev[0] == "PASS" and not rep.failed
    _CRITERIA[n] = ("PASS" if ok else "FAIL", prev[1] + rep.duration, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, secs, title = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {secs:8.2f}s  {title}")
