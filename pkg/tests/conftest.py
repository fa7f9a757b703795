import sys

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pkg", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pkg")


@pytest.fixture(scope="session")
def gauss():
    from ekpolylog.weierstrass import preset

    return preset("gauss")


@pytest.fixture(scope="session")
def split13(gauss):
    return gauss.prime_data()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        r = results[n]
        terminalreporter.write_line(f"{r.line()}  ({r.seconds:.1f}s)")
