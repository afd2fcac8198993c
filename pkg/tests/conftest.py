import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): gated acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    title = dict(report.user_properties).get("title", "")
    status = "PASS" if report.passed else "FAIL"
    if _ACCEPTANCE.get(number, ("PASS",))[0] == "FAIL":
        status = "FAIL"
    _ACCEPTANCE[number] = (status, title)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.user_properties.append(("criterion", marker.args[0]))
        item.user_properties.append(("title", marker.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE, key=int):
        status, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
