from fractions import Fraction

import numpy as np
import pytest

from dfcalc import FiniteMeasure, PolyFunctional, TensorFn

#: criterion id -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def F(x):
    return Fraction(x)


def vec(*xs):
    return TensorFn([Fraction(x) for x in xs])


@pytest.fixture
def uniform2():
    """Two atoms of weight one: the law of the first coordinate is uniform on [0, 1]."""
    return FiniteMeasure([1, 1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def linear(g):
    return PolyFunctional.monomial(g)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
