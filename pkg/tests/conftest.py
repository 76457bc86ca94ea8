import os
import sys

import numpy as np
import pytest
from hypothesis import settings

from polarce.array_channel import ArrayGeometry, FrequencyGrid

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def table2_geom():
    """N = 256 half-wavelength array at 100 GHz."""
    return ArrayGeometry.from_frequency(256, 100e9)


@pytest.fixture
def exact_geom():
    """N = 256, lambda = 3 mm exactly (d = 1.5 mm)."""
    return ArrayGeometry(256, 0.003)


@pytest.fixture
def small_geom():
    return ArrayGeometry(32, 0.003)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid32():
    return FrequencyGrid(32, 100e6, 100e9)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
