from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from mdlpoly.polytope import mdl_vertices
from mdlpoly.scenario import MdlParams, Scenario

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sc222():
    return Scenario.uniform(2, 2, 2)


@pytest.fixture(scope="session")
def mdl_1_10(sc222):
    """Vertices of MDL(1/10, 7/10) in (2,2,2)."""
    return mdl_vertices(sc222, MdlParams(Fraction(1, 10), Fraction(7, 10)))


# -- acceptance criteria summary -------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        _CRITERIA[marker.args[0]] = (rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
