"""Finite measures, dense tensor functions and bracket measures.

The phase space is ``{0, ..., d-1}``.  A measure is a weight vector, a
function of ``n`` variables is a dense array of shape ``(d,) * n`` stored
row-major.  The bracket measure of order ``n`` built from ``rho`` integrates
the first variable against ``rho``, the second against ``rho`` plus a unit
mass at the first point, and so on.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from math import factorial

import numpy as np

from .scalar import (
    DEFAULT_MEMORY_CAP,
    EXACT,
    FLOAT,
    ModeError,
    arrays_equal,
    check_mode,
    rising_factorial,
    to_array,
    to_scalar,
    zeros,
)


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class FiniteMeasure:
    """Nonnegative weights on ``d`` atoms with positive total mass ``theta``."""

    __slots__ = ("weights", "mode", "theta")

    def __init__(self, weights, mode=EXACT):
        check_mode(mode)
        w = to_array(list(weights), mode)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty sequence")
        if any(v < 0 for v in w):
            raise ValueError("weights must be nonnegative")
        theta = sum(w[1:], w[0])
        if not theta > 0:
            raise ValueError("total mass theta must be positive")
        self.weights = _frozen(w)
        self.mode = mode
        self.theta = theta

    @property
    def d(self):
        return self.weights.size

    @property
    def support(self):
        """Boolean mask of atoms with positive weight."""
        return np.array([v > 0 for v in self.weights], dtype=bool)

    def shifted(self, points):
        """Return ``rho + delta_{x_1} + ... + delta_{x_k}``."""
        w = np.array(self.weights, copy=True)
        one = to_scalar(1, self.mode)
        for x in points:
            x = int(x)
            if not 0 <= x < self.d:
                raise IndexError(f"atom {x} outside 0..{self.d - 1}")
            w[x] = w[x] + one
        return FiniteMeasure(w, self.mode)

    def integrate(self, f):
        """Return ``rho(f)`` for a one-variable function (array or TensorFn)."""
        values = f.values if isinstance(f, TensorFn) else to_array(f, self.mode)
        out = _dot(values, self.weights)
        return out[()] if out.ndim == 0 else out

    def astype(self, mode):
        if mode == self.mode:
            return self
        if mode == FLOAT:
            return FiniteMeasure([float(v) for v in self.weights], FLOAT)
        return FiniteMeasure([Fraction(v) for v in self.weights], EXACT)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteMeasure)
            and other.mode == self.mode
            and arrays_equal(self.weights, other.weights, self.mode)
        )

    def __hash__(self):
        return hash((self.mode, tuple(self.weights)))

    def __repr__(self):
        return f"FiniteMeasure({[str(v) for v in self.weights]}, mode={self.mode!r})"


class SimplexPoint:
    """A probability vector on ``d`` atoms."""

    __slots__ = ("probs", "mode")

    def __init__(self, probs, mode=EXACT, rtol=1e-12):
        p = to_array(list(probs), mode)
        if any(v < 0 for v in p):
            raise ValueError("probabilities must be nonnegative")
        total = sum(p[1:], p[0])
        if mode == EXACT and total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if mode == FLOAT and abs(total - 1.0) > rtol:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.probs = _frozen(p)
        self.mode = mode

    @property
    def d(self):
        return self.probs.size

    def __repr__(self):
        return f"SimplexPoint({[str(v) for v in self.probs]}, mode={self.mode!r})"


class TensorFn:
    """A function on ``{0..d-1}^n`` held as a dense array of shape ``(d,)*n``.

    Order 0 is a single scalar, stored as a 0-d array.
    """

    __slots__ = ("values", "d", "mode")

    def __init__(self, values, d=None, mode=EXACT):
        check_mode(mode)
        arr = to_array(values, mode)
        if arr.ndim == 0:
            if d is None:
                raise ValueError("order-0 tensors need an explicit d")
        else:
            if d is None:
                d = arr.shape[0]
            if arr.shape != (d,) * arr.ndim:
                raise ValueError(f"shape {arr.shape} is not (d,)*n with d={d}")
        self.values = _frozen(arr)
        self.d = int(d)
        self.mode = mode

    @classmethod
    def _wrap(cls, arr, d, mode):
        obj = cls.__new__(cls)
        arr = np.asarray(arr)
        if mode == FLOAT and arr.dtype != float:
            arr = arr.astype(float)
        obj.values = _frozen(arr)
        obj.d = int(d)
        obj.mode = mode
        return obj

    @classmethod
    def constant(cls, c, d, order=0, mode=EXACT):
        c = to_scalar(c, mode)
        arr = np.empty((d,) * order, dtype=object if mode == EXACT else float)
        arr.fill(c)
        return cls._wrap(arr, d, mode)

    @classmethod
    def zeros(cls, d, order, mode=EXACT):
        return cls._wrap(zeros((d,) * order, mode), d, mode)

    @classmethod
    def indicator(cls, point, d, mode=EXACT):
        """Indicator of a single point (a tuple of atoms)."""
        point = tuple(int(x) for x in point)
        arr = zeros((d,) * len(point), mode)
        arr[point] = to_scalar(1, mode)
        return cls._wrap(arr, d, mode)

    @property
    def order(self):
        return self.values.ndim

    @property
    def flat(self):
        return self.values.reshape(-1)

    def item(self):
        if self.order != 0:
            raise ValueError("item() needs an order-0 tensor")
        return self.values[()]

    def _check(self, other):
        if not isinstance(other, TensorFn):
            raise TypeError("expected a TensorFn")
        if other.mode != self.mode:
            raise ModeError("tensor modes differ")
        if other.d != self.d:
            raise ValueError("tensor dimensions differ")

    def __add__(self, other):
        self._check(other)
        return TensorFn._wrap(self.values + other.values, self.d, self.mode)

    def __sub__(self, other):
        self._check(other)
        return TensorFn._wrap(self.values - other.values, self.d, self.mode)

    def __neg__(self):
        return TensorFn._wrap(-self.values, self.d, self.mode)

    def scale(self, c):
        c = to_scalar(c, self.mode) if self.mode == EXACT else float(c)
        return TensorFn._wrap(self.values * c, self.d, self.mode)

    def __mul__(self, other):
        """Pointwise product of two tensors of the same order."""
        self._check(other)
        if other.order != self.order:
            raise ValueError("pointwise product needs equal orders")
        return TensorFn._wrap(self.values * other.values, self.d, self.mode)

    def outer(self, other):
        """Tensor product ``(x, y) -> f(x) g(y)``."""
        self._check(other)
        return TensorFn._wrap(np.multiply.outer(self.values, other.values), self.d, self.mode)

    def transpose(self, axes):
        return TensorFn._wrap(np.transpose(self.values, axes), self.d, self.mode)

    def is_symmetric(self, mask=None):
        """True if the tensor is invariant under argument permutations.

        With ``mask`` (a boolean vector over atoms) only points whose entries
        all lie in the mask are compared.
        """
        v = self.values
        if self.order <= 1:
            return True
        if mask is not None:
            idx = np.flatnonzero(mask)
            v = v[np.ix_(*([idx] * self.order))]
        for k in range(self.order - 1):
            axes = list(range(self.order))
            axes[k], axes[k + 1] = axes[k + 1], axes[k]
            if not arrays_equal(v, np.transpose(v, axes), self.mode):
                return False
        return True

    def equals(self, other, rtol=None):
        return (
            isinstance(other, TensorFn)
            and other.mode == self.mode
            and other.d == self.d
            and other.order == self.order
            and arrays_equal(self.values, other.values, self.mode, rtol)
        )

    __eq__ = equals

    def __hash__(self):
        return hash((self.mode, self.d, self.values.shape, tuple(self.flat)))

    def astype(self, mode):
        if mode == self.mode:
            return self
        if mode == FLOAT:
            return TensorFn._wrap(self.values.astype(float), self.d, FLOAT)
        return TensorFn(np.vectorize(Fraction, otypes=[object])(self.values), self.d, EXACT)

    def __repr__(self):
        return f"TensorFn(order={self.order}, d={self.d}, mode={self.mode!r})"


def _dot(values, weights):
    """Contract the last axis of ``values`` with ``weights``."""
    return np.tensordot(values, weights, axes=([values.ndim - 1], [0]))


def _check_pair(rho, f):
    if f.d != rho.d:
        raise ValueError(f"tensor has d={f.d}, measure has d={rho.d}")
    if f.mode != rho.mode:
        raise ModeError("measure and tensor modes differ")


# ---------------------------------------------------------------------------
# bracket measures


def _diag_to(values, i, last):
    """Entries ``v[..., x_i, ..., x_i]`` with the diagonal placed at axis ``i``."""
    diag = np.diagonal(values, axis1=i, axis2=last)
    return np.moveaxis(diag, -1, i)


def _bracket_step(values, weights):
    """Integrate the last variable against rho plus Diracs at the others."""
    last = values.ndim - 1
    out = _dot(values, weights)
    for i in range(last):
        out = out + _diag_to(values, i, last)
    return out


def bracket_integrate(rho, f):
    """Return ``rho^[n](f)`` by nested integration.

    The innermost variable is integrated against ``rho`` plus unit masses at
    the preceding variables, then the next one, down to the first variable
    which sees ``rho`` alone.  An order-0 tensor integrates to itself.
    """
    _check_pair(rho, f)
    v = f.values
    while v.ndim > 0:
        v = _bracket_step(v, rho.weights)
    return v[()] if isinstance(v, np.ndarray) else v


def bracket_materialize(rho, n, cap=DEFAULT_MEMORY_CAP):
    """Dense weights ``W(x) = rho^[n]({x})``.

    ``W(x_1..x_n) = prod_k (rho(x_k) + #{i < k : x_i = x_k})``.
    """
    n = int(n)
    if rho.d**n > cap:
        raise MemoryError(f"d^n = {rho.d ** n} exceeds the memory cap {cap}")
    d = rho.d
    one = to_scalar(1, rho.mode)
    w = rho.weights
    W = np.array(one, dtype=w.dtype)
    eye = np.eye(d, dtype=int)
    counts = np.zeros(d, dtype=int)
    for k in range(n):
        # counts[x_1..x_k, y] = #{i <= k : x_i = y}
        factor = w + counts
        W = W[..., None] * factor
        if k + 1 < n:
            counts = counts[..., None, :] + eye.reshape((1,) * k + (d, d))
    return TensorFn._wrap(W, d, rho.mode)


def contract(W, f):
    """Sum of ``W * f`` over all points."""
    if W.order != f.order:
        raise ValueError("orders differ")
    prod = W.values * f.values
    if prod.ndim == 0:
        return prod[()]
    return prod.reshape(-1).sum()


# ---------------------------------------------------------------------------
# symmetric layout: multisets of atoms


@dataclass(frozen=True)
class _Layout:
    d: int
    n: int
    reps: np.ndarray  # (n_orbits, n) sorted tuples
    counts: np.ndarray  # (n_orbits, d) multiplicities
    sizes: np.ndarray  # orbit sizes (multinomial coefficients), object ints
    inverse: np.ndarray  # flat index -> orbit id
    rep_flat: np.ndarray  # flat index of each representative


def _encode(tuples, d):
    n = tuples.shape[-1]
    if n == 0:
        return np.zeros(tuples.shape[:-1], dtype=np.int64)
    powers = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return tuples.astype(np.int64) @ powers


@lru_cache(maxsize=None)
def symmetric_layout(d, n):
    """Orbits of ``{0..d-1}^n`` under permutation of coordinates."""
    reps = np.array(list(combinations_with_replacement(range(d), n)), dtype=np.int64)
    reps = reps.reshape(len(reps), n)
    counts = np.zeros((reps.shape[0], d), dtype=np.int64)
    for k in range(n):
        np.add.at(counts, (np.arange(reps.shape[0]), reps[:, k]), 1)
    sizes = np.array([_multinomial(c) for c in counts], dtype=object)
    if n == 0:
        inverse = np.zeros(1, dtype=np.int64)
    else:
        grid = np.indices((d,) * n).reshape(n, -1).T
        codes = _encode(np.sort(grid, axis=1), d)
        inverse = np.searchsorted(_encode(reps, d), codes)
    rep_flat = _encode(reps, d)
    for arr in (reps, counts, sizes, inverse, rep_flat):
        arr.setflags(write=False)
    return _Layout(d, n, reps, counts, sizes, inverse, rep_flat)


def _multinomial(counts):
    total = factorial(int(sum(counts)))
    for c in counts:
        total //= factorial(int(c))
    return total


def orbit_sums(values, layout, mode):
    """Sum of tensor entries over each orbit."""
    flat = np.asarray(values).reshape(-1)
    sums = zeros(layout.reps.shape[0], mode)
    np.add.at(sums, layout.inverse, flat)
    return sums


def symmetrize(f):
    """Average of ``f`` over all permutations of its arguments."""
    if f.order <= 1:
        return f
    lay = symmetric_layout(f.d, f.order)
    means = orbit_sums(f.values, lay, f.mode) / lay.sizes
    if f.mode == FLOAT:
        means = means.astype(float)
    return TensorFn._wrap(means[lay.inverse].reshape(f.values.shape), f.d, f.mode)


def symmetrize_bruteforce(f):
    """Literal ``(1/n!) sum_pi f o pi``; only for small orders."""
    total = None
    for perm in permutations(range(f.order)):
        term = np.transpose(f.values, perm)
        total = term if total is None else total + term
    if total is None:
        return f
    return TensorFn._wrap(total / factorial(f.order), f.d, f.mode)


def rising_table(weights, n, mode):
    """``table[i][k] = w_i^(k)`` for ``k = 0..n``."""
    table = []
    for w in weights:
        row = [to_scalar(1, mode)]
        for k in range(n):
            row.append(row[-1] * (w + k))
        table.append(row)
    return table


def orbit_weights(rho, n):
    """``rho^[n]`` mass of a single point in each orbit: ``prod_i w_i^(c_i)``."""
    lay = symmetric_layout(rho.d, n)
    table = rising_table(rho.weights, n, rho.mode)
    out = np.empty(lay.reps.shape[0], dtype=object)
    for j, c in enumerate(lay.counts):
        val = to_scalar(1, rho.mode)
        for i, k in enumerate(c):
            if k:
                val = val * table[i][k]
        out[j] = val
    if rho.mode == FLOAT:
        out = out.astype(float)
    return out


def bracket_integrate_symmetric(rho, f):
    """``rho^[n](f)`` for symmetric ``f`` by summing over multisets.

    The mass of a point under ``rho^[n]`` only depends on how often each atom
    occurs, so a symmetric integrand needs one term per multiset.
    """
    _check_pair(rho, f)
    if f.order == 0:
        return f.item()
    lay = symmetric_layout(rho.d, f.order)
    vals = f.flat[lay.rep_flat]
    return (vals * lay.sizes * orbit_weights(rho, f.order)).sum()


# ---------------------------------------------------------------------------
# reindexing and Dirac-sum expansions


def _check_index_list(m, i_list):
    i_list = tuple(int(i) for i in i_list)
    if len(set(i_list)) != len(i_list):
        raise ValueError(f"indices {i_list} are not pairwise distinct")
    if any(not 0 <= i < m for i in i_list):
        raise IndexError(f"indices {i_list} outside 0..{m - 1}")
    return i_list


def reindex(f, i_list):
    """Return ``f_{i_1..i_r}``.

    The new function places its first ``r`` arguments at positions
    ``i_1..i_r`` of ``f`` and the remaining arguments, in order, at the
    positions not listed.  Positions are 0-based.
    """
    i_list = _check_index_list(f.order, i_list)
    rest = [p for p in range(f.order) if p not in i_list]
    return f.transpose(list(i_list) + rest)


def diracsum(f, i_list, points):
    """``f^k_{i_1..i_r}(x_1..x_k, .)`` for given atoms ``x_1..x_k``.

    This is the sum over ``j_1 <= ... <= j_r`` in ``0..k-1`` of
    ``f_{i_1..i_r}(x_{j_1}, ..., x_{j_r}, .)``, a function of the remaining
    ``m - r`` variables.
    """
    g = reindex(f, i_list)
    r = len(i_list)
    points = [int(x) for x in points]
    out = zeros((f.d,) * (f.order - r), f.mode)
    for js in combinations_with_replacement(range(len(points)), r):
        out = out + g.values[tuple(points[j] for j in js)]
    return TensorFn._wrap(out, f.d, f.mode)


def add_diracs_expand(rho, f, points):
    """``(rho + delta_{x_1} + ... + delta_{x_k})^[m](f)`` by the closed-form expansion.

    The result is ``rho^[m](f)`` plus, for every ``r`` and every tuple of
    ``r`` pairwise distinct positions, the ``rho^[m-r]`` integral of the
    corresponding Dirac sum.
    """
    _check_pair(rho, f)
    total = bracket_integrate(rho, f)
    if not len(points):
        return total
    m = f.order
    for r in range(1, m + 1):
        for i_list in permutations(range(m), r):
            total = total + bracket_integrate(rho, diracsum(f, i_list, points))
    return total


# ---------------------------------------------------------------------------
# set partitions and the partition moment formula


@dataclass(frozen=True)
class SetPartition:
    """Disjoint nonempty blocks covering ``{0..m-1}``."""

    blocks: tuple

    def __post_init__(self):
        seen = [i for b in self.blocks for i in b]
        if any(len(b) == 0 for b in self.blocks):
            raise ValueError("empty block")
        if sorted(seen) != list(range(len(seen))):
            raise ValueError("blocks must partition 0..m-1")

    @property
    def size(self):
        return sum(len(b) for b in self.blocks)


def partitions(m):
    """Yield every set partition of ``{0..m-1}`` once (restricted growth strings)."""
    if m < 1:
        raise ValueError("m must be at least 1")

    def grow(prefix, top):
        if len(prefix) == m:
            blocks = [[] for _ in range(top + 1)]
            for i, b in enumerate(prefix):
                blocks[b].append(i)
            yield SetPartition(tuple(tuple(b) for b in blocks))
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))

    yield from grow([0], 0)


def moment_partition_formula(rho, fs):
    """``rho^[m](f_1 x ... x f_m)`` as a sum over set partitions.

    Each block ``I`` contributes ``(|I|-1)! rho(prod_{k in I} f_k)``.
    """
    fs = list(fs)
    for f in fs:
        _check_pair(rho, f)
        if f.order != 1:
            raise ValueError("all factors must be one-variable functions")
    total = to_scalar(0, rho.mode)
    for part in partitions(len(fs)):
        term = to_scalar(1, rho.mode)
        for block in part.blocks:
            prod = fs[block[0]].values
            for k in block[1:]:
                prod = prod * fs[k].values
            term = term * factorial(len(block) - 1) * _dot(prod, rho.weights)
        total = total + term
    return total


def tensor_product(fs, d=None, mode=EXACT):
    """``f_1 x ... x f_m`` for one-variable functions."""
    fs = list(fs)
    if not fs:
        return TensorFn.constant(1, d, 0, mode)
    out = fs[0]
    for f in fs[1:]:
        out = out.outer(f)
    return out


def rising_sum_identity(theta, m, j):
    """Both sides of a summation identity for rising factorials.

    ``sum_{n=j}^m (-1)^(n-j) (theta+2n-1)/(n-j)! (theta+j)^(n-1)`` against
    ``(-1)^(m-j) (theta+j)^(m)/(m-j)!``.  Returns ``(lhs, rhs, holds)``.
    """
    if m < 2 or not 1 <= j <= m - 1:
        raise ValueError("need m >= 2 and 1 <= j <= m-1")
    if not theta > 0:
        raise ValueError("theta must be positive")
    mode = FLOAT if isinstance(theta, float) else EXACT
    theta = to_scalar(theta, mode)
    lhs = to_scalar(0, mode)
    for n in range(j, m + 1):
        lhs = lhs + (-1) ** (n - j) * (theta + 2 * n - 1) / factorial(n - j) * rising_factorial(theta + j, n - 1)
    rhs = (-1) ** (m - j) * rising_factorial(theta + j, m) / factorial(m - j)
    holds = lhs == rhs if mode == EXACT else abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))
    return lhs, rhs, holds
