import numpy as np
import pytest

from sp1sw.backend import get_backend

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")
    config.addinivalue_line("markers", "slow: takes more than a minute")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = m.args
        # parametrized criteria pass only if every case passes
        prev = _acceptance.get(number, (title, "PASS"))[1]
        _acceptance[number] = (title, "PASS" if rep.passed and prev == "PASS" else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        title, status = _acceptance[n]
        terminalreporter.write_line(f"[{status}] #{n:>2} {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fd():
    return get_backend("fd")


@pytest.fixture(scope="session")
def ad():
    return get_backend("ad")
