import random

import pytest
from hypothesis import HealthCheck, settings

from proxshift.base_system import full_shift, random_point
from proxshift.tower import build_tower, default_toy_tower

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    results = item.config.stash[_RESULTS]
    prev = results.get(number, (title, True))
    results[number] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def toy():
    return default_toy_tower(3)


@pytest.fixture(scope="session")
def toy2():
    return default_toy_tower(2)


@pytest.fixture(scope="session")
def strict():
    return build_tower(K=1)


@pytest.fixture(scope="session")
def roots():
    rng = random.Random(2024)
    return [random_point(full_shift(2), rng) for _ in range(6)]
