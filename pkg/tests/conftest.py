"""Shared fixtures, the Type-I verdict recorder and the acceptance report."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

import turing_one.classify as _classify_mod  # noqa: E402
from turing_one import grayscott as gs  # noqa: E402

# Every Type-I verdict produced during the session, whichever test made it.
TYPE_I_VERDICTS = []
_original_classify = _classify_mod.classify


def _recording_classify(*args, **kwargs):
    v = _original_classify(*args, **kwargs)
    if v.kind == "TypeI":
        TYPE_I_VERDICTS.append(v)
    return v


_classify_mod.classify = _recording_classify

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


def pytest_collection_modifyitems(config, items):
    # Criterion 7 inspects verdicts from the whole run, so acceptance goes last
    # and criterion 7 goes last of all.
    def key(item):
        m = item.get_closest_marker("acceptance")
        if m is None:
            return (0, 0)
        return (2, 0) if m.args[0] == 7 else (1, m.args[0])
    items.sort(key=key)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is None:
        return
    n, title = m.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE.setdefault(n, [title, True])
        if rep.outcome != "passed":
            _ACCEPTANCE[n][1] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def set_a():
    return gs.PRESETS["A"]


@pytest.fixture(scope="session")
def set_b():
    return gs.PRESETS["B"]


@pytest.fixture(scope="session")
def jac_a(set_a):
    return gs.jacobian_at(set_a, gs.equilibrium(set_a, "Plus"))
