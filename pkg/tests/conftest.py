import os

import pytest
from hypothesis import HealthCheck, settings

from fthresh.poly import PolyRing

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("FTHRESH_HYPOTHESIS_EXAMPLES", "60")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def ring():
    def make(p, n=2):
        return PolyRing(p, n)

    return make


ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): numbered acceptance criterion")
    config.stash[ACCEPTANCE] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, text = marker.args
    results = item.config.stash[ACCEPTANCE]
    if rep.when == "call" or number not in results:
        results[number] = (text, rep.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        text, ok = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")
