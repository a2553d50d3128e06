"""Shared fixtures.  Expensive pipeline products are cached per session."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ghp", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("ghp")

_ROOTS: dict = {}
_CURVES: dict = {}


def scaled_roots(m: int, n: int) -> np.ndarray:
    from ghp.compare import exact_scaled_roots

    if (m, n) not in _ROOTS:
        _ROOTS[(m, n)] = exact_scaled_roots(m, n)
    return _ROOTS[(m, n)]


def boundary(nu: float, points: int = 128):
    from ghp.region import trace_boundary

    key = (round(nu, 15), points)
    if key not in _CURVES:
        _CURVES[key] = trace_boundary(nu, points)
    return _CURVES[key]


@pytest.fixture(scope="session")
def roots_22_16():
    return scaled_roots(22, 16)


@pytest.fixture(scope="session")
def curve_third():
    return boundary(1 / 3, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def traced():
    """Cached ``trace_boundary``: ``traced(nu, points)``."""
    return boundary


@pytest.fixture(scope="session")
def exact_roots():
    """Cached scaled exact roots: ``exact_roots(m, n)``."""
    return scaled_roots


# ---------------------------------------------------------------- acceptance report

_ACCEPT: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    _ACCEPT[number] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPT):
        status, title, detail = _ACCEPT[number]
        line = f"criterion {number:2d} {status}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
