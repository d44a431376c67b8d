"""Scalar modes and small numeric helpers.

Two modes are supported.  ``"exact"`` works with :class:`fractions.Fraction`
and compares bit for bit; ``"float"`` works with binary64 and compares with
a relative tolerance.  Arrays in exact mode are numpy object arrays holding
Fractions.
"""

from fractions import Fraction
from math import factorial

import numpy as np

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

#: relative tolerance used for float-mode comparisons unless overridden
DEFAULT_RTOL = 1e-9

#: largest number of dense entries a materialized tensor may hold
DEFAULT_MEMORY_CAP = 10**7


class ModeError(TypeError):
    """Raised when exact and float quantities are mixed."""


def check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    return mode


def to_scalar(value, mode):
    """Convert ``value`` to the scalar type of ``mode``.

    Exact mode accepts ints, Fractions and strings such as ``"3/7"``.
    Floats are refused there, since they would silently carry rounding.
    """
    check_mode(mode)
    if mode == EXACT:
        if isinstance(value, (bool, np.bool_)):
            raise ModeError("booleans are not scalars")
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, np.integer)):
            return Fraction(int(value))
        if isinstance(value, str):
            return Fraction(value.strip())
        if isinstance(value, (float, np.floating)):
            raise ModeError(f"float {value!r} given in exact mode")
        raise TypeError(f"cannot convert {type(value).__name__} to an exact scalar")
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    if isinstance(value, (Fraction, int, float, np.integer, np.floating)):
        return float(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a float scalar")


def to_array(values, mode):
    """Return a numpy array of scalars in ``mode`` (object dtype when exact)."""
    check_mode(mode)
    if mode == FLOAT:
        arr = np.asarray(values)
        if arr.dtype == object:
            arr = np.vectorize(lambda v: to_scalar(v, FLOAT), otypes=[float])(arr)
        return np.array(arr, dtype=float)
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = to_scalar(v, EXACT)
    return out


def zeros(shape, mode):
    if check_mode(mode) == FLOAT:
        return np.zeros(shape, dtype=float)
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def ones(shape, mode):
    if check_mode(mode) == FLOAT:
        return np.ones(shape, dtype=float)
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(1))
    return out


def array_mode(arr):
    return EXACT if np.asarray(arr).dtype == object else FLOAT


def rising_factorial(w, n):
    """Return ``w (w+1) ... (w+n-1)``; the empty product for ``n = 0`` is 1."""
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    out = 1 if isinstance(w, (Fraction, int)) else 1.0
    if isinstance(out, int):
        out = Fraction(1)
    for k in range(int(n)):
        out = out * (w + k)
    return out


def scalars_equal(a, b, mode, rtol=None):
    """Exact equality, or relative closeness in float mode."""
    if mode == EXACT:
        return a == b
    rtol = DEFAULT_RTOL if rtol is None else rtol
    a, b = float(a), float(b)
    scale = max(abs(a), abs(b), 1.0)
    return abs(a - b) <= rtol * scale


def arrays_equal(a, b, mode, rtol=None):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    if mode == EXACT:
        return bool(np.all(a == b))
    rtol = DEFAULT_RTOL if rtol is None else rtol
    if a.size == 0:
        return True
    scale = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)), 1.0)
    return bool(np.max(np.abs(a - b)) <= rtol * scale)


def format_scalar(value, mode):
    """Serialize a scalar: ``"p/q"`` strings when exact, plain floats otherwise."""
    if mode == EXACT:
        value = Fraction(value)
        return str(value)
    return float(value)


def multinomial(counts):
    total = factorial(sum(counts))
    for c in counts:
        total //= factorial(c)
    return total
