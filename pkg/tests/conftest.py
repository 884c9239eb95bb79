import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from srgkit.lti import load_model

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

MODELS = Path(__file__).resolve().parents[1] / "models"


@pytest.fixture(scope="session")
def models_dir():
    return MODELS


@pytest.fixture(scope="session")
def t1():
    """e^{-s}/(s+1)."""
    return load_model(MODELS / "t1.json")


@pytest.fixture(scope="session")
def t2():
    """[[1/(s-1), s/(s-1)], [(s+1)/(s+3), 1/(s+2)]]."""
    return load_model(MODELS / "t2.json")


@pytest.fixture(scope="session")
def t3():
    """The integrator 1/s."""
    return load_model(MODELS / "t3.json")


@pytest.fixture(scope="session")
def first_order():
    return load_model(MODELS / "first_order.json")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report -------------------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::test_criterion_")[1].split("[")[0]
        num = int(name.split("_")[0])
        status, _, dur = _ACCEPTANCE.get(num, ("PASS", name, 0.0))
        # parametrized criteria pass only if every case passes
        status = status if report.passed else "FAIL"
        _ACCEPTANCE[num] = (status, name, dur + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        status, name, dur = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {status}  ({name}, {dur:.1f} s)")
