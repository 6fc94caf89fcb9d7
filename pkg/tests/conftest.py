import os

import hypothesis
import numpy as np
import pytest

from levy_quant.measure_change import MarketEnv, risk_neutralize
from levy_quant.model_zoo import BS, CGMY, GH, NIG, VG, Kou, Meixner, Merton

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# One admissible parameter set per family; shared by the cross-module tests.
ZOO = {
    "bs": BS(0.05, 0.2),
    "merton": Merton(0.1, 0.15, 0.5, -0.1, 0.15),
    "kou": Kou(0.0, 0.15, 1.0, 0.4, 10.0, 5.0),
    "vg": VG(0.2, -0.15, 0.2),
    "nig": NIG(15.0, -3.0, 0.4),
    "gh": GH(3.0, -1.0, 0.5, 0.1, 1.0),
    "cgmy": CGMY(1.0, 5.0, 10.0, 0.5),
    "meixner": Meixner(0.3, -0.3, 1.0),
}
SIMULABLE = ("bs", "merton", "kou", "nig", "vg")


@pytest.fixture
def env():
    return MarketEnv(r=0.05, div=0.0, S0=100.0)


@pytest.fixture
def env_div():
    return MarketEnv(r=0.05, div=0.02, S0=100.0)


def risk_neutral(name, market):
    return risk_neutralize(ZOO[name], market)


@pytest.fixture
def u_grid():
    return np.linspace(-10.0, 10.0, 21)


# ---------------------------------------------------------------------------
# Acceptance report: one PASS/FAIL line per criterion, printed after the run.
# ---------------------------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion; any exception counts as FAIL."""
    state = {}

    def record(number: int, ok: bool, detail: str):
        state["n"] = number
        _ACCEPTANCE[number] = (bool(ok), detail)
        print(f"ACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")

    yield record
    rep = getattr(request.node, "rep_call", None)
    if rep is not None and rep.failed and "n" in state and _ACCEPTANCE[state["n"]][0]:
        _ACCEPTANCE[state["n"]] = (False, _ACCEPTANCE[state["n"]][1] + " (test raised)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
        marker = item.get_closest_marker("acceptance")
        if marker and rep.failed and marker.args[0] not in _ACCEPTANCE:
            _ACCEPTANCE[marker.args[0]] = (False, f"raised {call.excinfo.typename}" if call.excinfo else "failed")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number n")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
