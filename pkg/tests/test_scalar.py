from fractions import Fraction

import numpy as np
import pytest

from dfcalc.scalar import (
    EXACT,
    FLOAT,
    ModeError,
    arrays_equal,
    format_scalar,
    rising_factorial,
    scalars_equal,
    to_array,
    to_scalar,
)


@pytest.mark.parametrize(
    "w, n, expected",
    [(2, 0, 1), (1, 3, 6), (Fraction(3, 2), 2, Fraction(15, 4)), (Fraction(1, 2), 3, Fraction(15, 8))],
)
def test_rising_factorial_values(w, n, expected):
    assert rising_factorial(Fraction(w), n) == expected


def test_rising_factorial_float_and_errors():
    assert rising_factorial(1.5, 2) == pytest.approx(3.75)
    with pytest.raises(ValueError):
        rising_factorial(Fraction(1), -1)


def test_exact_mode_rejects_floats():
    assert to_scalar("3/4", EXACT) == Fraction(3, 4)
    assert to_scalar(5, EXACT) == 5
    with pytest.raises(ModeError):
        to_scalar(0.5, EXACT)


def test_to_array_modes():
    a = to_array(["1/2", 3], EXACT)
    assert a.dtype == object and a[0] == Fraction(1, 2)
    b = to_array([0.5, 3], FLOAT)
    assert b.dtype == float


def test_float_comparison_is_relative():
    assert scalars_equal(1e6, 1e6 * (1 + 1e-12), FLOAT)
    assert not scalars_equal(1.0, 1.001, FLOAT)
    assert scalars_equal(1.0, 1.001, FLOAT, rtol=1e-2)
    assert arrays_equal(np.array([1.0, 2.0]), np.array([1.0, 2.0 + 1e-12]), FLOAT)
    assert not arrays_equal(np.array([Fraction(1)]), np.array([Fraction(1, 1) + Fraction(1, 10**30)]), EXACT)


def test_format_scalar():
    assert format_scalar(Fraction(-3, 6), EXACT) == "-1/2"
    assert format_scalar(2, EXACT) == "2"
    assert format_scalar(0.25, FLOAT) == 0.25
