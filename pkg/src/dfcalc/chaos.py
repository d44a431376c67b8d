"""Chaos decomposition of polynomial functionals.

Every square-integrable functional of the Dirichlet random measure splits
into orthogonal pieces ``zeta^n(f_n)`` whose kernels ``f_n`` are symmetric
and conditionally centred: integrating the last variable against ``rho``
plus unit masses at the other variables gives zero.  Kernels are computed
from Palm expectations by an explicit alternating sum.
"""

from itertools import combinations, permutations
from math import factorial

import numpy as np

from .law import PolyFunctional, expect_poly, tfn
from .measure import (
    FiniteMeasure,
    TensorFn,
    _bracket_step,
    add_diracs_expand,
    bracket_integrate,
    moment_partition_formula,
    symmetric_layout,
)
from .scalar import EXACT, FLOAT, ModeError, arrays_equal, rising_factorial, to_scalar, zeros


class ChaosExpansion:
    """``F = f0 + sum_n zeta^n(f_n)`` with kernels ``f_n`` of order ``n``."""

    __slots__ = ("f0", "kernels", "d", "mode")

    def __init__(self, f0, kernels, d, mode=EXACT):
        self.d = int(d)
        self.mode = mode
        self.f0 = to_scalar(f0, mode)
        ks = {}
        for n, k in dict(kernels).items():
            n = int(n)
            if n < 1:
                raise ValueError("kernel orders start at 1")
            if k.order != n or k.d != self.d:
                raise ValueError(f"kernel {n} has order {k.order} and d={k.d}")
            if k.mode != mode:
                raise ModeError("kernel modes differ")
            ks[n] = k
        self.kernels = dict(sorted(ks.items()))

    def kernel(self, n):
        if n == 0:
            return TensorFn.constant(self.f0, self.d, 0, self.mode)
        return self.kernels.get(n, TensorFn.zeros(self.d, n, self.mode))

    @property
    def max_order(self):
        return max(self.kernels, default=0)

    def nonzero_orders(self):
        return [n for n, k in self.kernels.items() if any(v != 0 for v in k.flat)]

    def map_kernels(self, fn, f0=None):
        """New expansion with kernel ``n`` replaced by ``fn(n, f_n)``."""
        return ChaosExpansion(
            self.f0 if f0 is None else f0,
            {n: fn(n, k) for n, k in self.kernels.items()},
            self.d,
            self.mode,
        )

    def astype(self, mode):
        if mode == self.mode:
            return self
        f0 = float(self.f0) if mode == FLOAT else self.f0
        return ChaosExpansion(f0, {n: k.astype(mode) for n, k in self.kernels.items()}, self.d, mode)

    def equals(self, other, support=None, rtol=None):
        if not isinstance(other, ChaosExpansion) or other.mode != self.mode or other.d != self.d:
            return False
        if not arrays_equal(np.array([self.f0]), np.array([other.f0]), self.mode, rtol):
            return False
        for n in set(self.kernels) | set(other.kernels):
            a, b = self.kernel(n).values, other.kernel(n).values
            if support is not None:
                idx = np.flatnonzero(support)
                a, b = a[np.ix_(*([idx] * n))], b[np.ix_(*([idx] * n))]
            if not arrays_equal(a, b, self.mode, rtol):
                return False
        return True

    def __repr__(self):
        return f"ChaosExpansion(d={self.d}, orders={list(self.kernels)}, mode={self.mode!r})"


def centering_defect(rho, g):
    """``x -> int g(x_1..x_{n-1}, y) (rho + delta_{x_1} + ... + delta_{x_{n-1}})(dy)``."""
    return _bracket_step(g.values, rho.weights)


def _support_view(values, mask):
    if values.ndim == 0:
        return values
    idx = np.flatnonzero(mask)
    return values[np.ix_(*([idx] * values.ndim))]


def is_in_Hn(rho, g):
    """True if ``g`` is symmetric and conditionally centred.

    Checked at every point whose coordinates carry positive weight, which is
    where the bracket measure lives.
    """
    if g.order < 1:
        raise ValueError("H_n is defined for n >= 1")
    if g.d != rho.d or g.mode != rho.mode:
        return False
    mask = rho.support
    if not g.is_symmetric(mask):
        return False
    defect = _support_view(np.asarray(centering_defect(rho, g)), mask)
    return arrays_equal(defect, zeros(defect.shape, rho.mode), rho.mode)


def _subset_sum(T, n, d):
    """``x -> sum over j-subsets S of {0..n-1} of T(x_S)`` for a symmetric ``T``."""
    j = T.ndim
    out = None
    for S in combinations(range(n), j):
        shape = [1] * n
        for s in S:
            shape[s] = d
        term = np.broadcast_to(T.reshape(shape), (d,) * n)
        out = term if out is None else out + term
    return out


def combine_palm(theta, n, palm, d, mode):
    """Kernel ``f_n`` from Palm tensors ``palm[j]`` of orders ``j = 0..n``.

    ``f_n(x) = (theta+2n-1)/n! sum_j (-1)^(n-j) (theta+j)^(n-1) sum_{|S|=j} T_j(x_S)``.
    """
    total = zeros((d,) * n, mode)
    for j in range(n + 1):
        coef = (-1) ** (n - j) * rising_factorial(theta + j, n - 1)
        total = total + _subset_sum(np.asarray(palm[j]), n, d) * coef
    total = total * ((theta + 2 * n - 1) / factorial(n))
    return TensorFn._wrap(total, d, mode)


def kernels_general(rho, F, max_order=None):
    """Chaos kernels of a polynomial functional from Palm expectations."""
    if F.d != rho.d:
        raise ValueError("dimension mismatch")
    top = F.degree if max_order is None else int(max_order)
    palm = [tfn(rho, F, j).values for j in range(top + 1)]
    kernels = {n: combine_palm(rho.theta, n, palm, rho.d, rho.mode) for n in range(1, top + 1)}
    return ChaosExpansion(palm[0][()], kernels, rho.d, rho.mode)


def shifted_brackets(rho, f, j):
    """Tensor ``y -> (rho + delta_{y_1} + ... + delta_{y_j})^[m](f)`` via the Dirac expansion."""
    lay = symmetric_layout(rho.d, j)
    vals = np.empty(lay.reps.shape[0], dtype=object)
    for i, rep in enumerate(lay.reps):
        vals[i] = add_diracs_expand(rho, f, list(rep))
    if rho.mode == FLOAT:
        vals = vals.astype(float)
    return vals[lay.inverse].reshape((rho.d,) * j)


def kernels_monomial(rho, f, max_order=None):
    """Chaos kernels of ``zeta^m(f)`` from shifted bracket integrals of ``f``.

    Kernel ``k`` uses ``(rho + delta_{x_S})^[m](f) / (theta+j)^(m)`` over
    subsets ``S`` of size ``j``; for ``j = 0`` this is ``rho^[m](f) / theta^(m)``.
    Kernels of order above ``m`` vanish.
    """
    if f.order < 1:
        raise ValueError("need a tensor of order at least 1")
    m = f.order
    top = m if max_order is None else int(max_order)
    theta = rho.theta
    palm = [shifted_brackets(rho, f, j) / rising_factorial(theta + j, m) for j in range(top + 1)]
    kernels = {k: combine_palm(theta, k, palm, rho.d, rho.mode) for k in range(1, top + 1)}
    return ChaosExpansion(np.asarray(palm[0])[()], kernels, rho.d, rho.mode)


def reconstruct(rho, ce, check=True):
    """The functional ``f0 + sum_n zeta^n(f_n)``."""
    if check:
        for n, k in ce.kernels.items():
            if not is_in_Hn(rho, k):
                raise ValueError(f"kernel of order {n} is not symmetric and centred")
    terms = {0: TensorFn.constant(ce.f0, ce.d, 0, ce.mode)}
    terms.update(ce.kernels)
    return PolyFunctional(terms, d=ce.d, mode=ce.mode)


def chaos_inner(rho, ceF, ceG):
    """``E[FG] = f0 g0 + sum_n n!/theta^(2n) rho^[n](f_n g_n)``."""
    total = ceF.f0 * ceG.f0
    for n in sorted(set(ceF.kernels) & set(ceG.kernels)):
        prod = ceF.kernels[n] * ceG.kernels[n]
        total = total + factorial(n) * bracket_integrate(rho, prod) / rising_factorial(rho.theta, 2 * n)
    return total


def variance(rho, ce):
    return chaos_inner(rho, ce, ce) - ce.f0 * ce.f0


def _require_hn(rho, h):
    if not is_in_Hn(rho, h):
        raise ValueError("h must be symmetric and centred")


def _product_on_axes(d, k, factors, mode):
    """``x -> prod_l g_l(x_{a_l})`` for pairs ``(g_l, a_l)``, as an order-``k`` array."""
    out = np.broadcast_to(np.asarray(to_scalar(1, mode)), (d,) * k)
    for g, axis in factors:
        shape = [1] * k
        shape[axis] = d
        out = out * g.values.reshape(shape)
    return out


def diracsum_product(hs, k):
    """``h^k`` for a product ``h_{i_1} x ... x h_{i_r}``.

    ``x -> sum over j_1 <= ... <= j_r in 0..k-1 of prod_l h_{i_l}(x_{j_l})``.
    """
    from itertools import combinations_with_replacement

    d, mode = hs[0].d, hs[0].mode
    out = zeros((d,) * k, mode)
    for js in combinations_with_replacement(range(k), len(hs)):
        out = out + _product_on_axes(d, k, list(zip(hs, js)), mode)
    return TensorFn._wrap(out, d, mode)


def covariance_chaos(rho, h, hs):
    """``Cov[zeta^k(h), zeta^m(h_1 x ... x h_m)]`` for ``h`` in the ``k``-th kernel space."""
    _require_hn(rho, h)
    hs = list(hs)
    k, m = h.order, len(hs)
    if m < 1:
        raise ValueError("need at least one factor")
    total = to_scalar(0, rho.mode)
    for r in range(1, m + 1):
        for idx in permutations(range(m), r):
            rest = [hs[j] for j in range(m) if j not in idx]
            outer = moment_partition_formula(rho, rest) if rest else to_scalar(1, rho.mode)
            inner = bracket_integrate(rho, diracsum_product([hs[i] for i in idx], k) * h)
            total = total + outer * inner
    return total / rising_factorial(rho.theta, m + k)


def _compositions(r, k):
    """Tuples of ``k`` positive integers summing to ``r``."""
    if k == 1:
        if r >= 1:
            yield (r,)
        return
    for first in range(1, r - k + 2):
        for rest in _compositions(r - first, k - 1):
            yield (first,) + rest


def covariance_power(rho, h, f, m):
    """``Cov(zeta^k(h), zeta^m(f x ... x f))`` summed over compositions.

    Compositions have positive parts: a part equal to zero would leave one
    variable free, and its integral against a centred ``h`` vanishes.  For
    ``k = 2`` the split into a diagonal and an off-diagonal term is used.
    """
    _require_hn(rho, h)
    if h.order == 2:
        return covariance_power_k2(rho, h, f, m)
    return covariance_power_compositions(rho, h, f, m)


def _power_prefactor(rho, f, m, r):
    rest = [f] * (m - r)
    outer = moment_partition_formula(rho, rest) if rest else to_scalar(1, rho.mode)
    return factorial(m) // factorial(m - r) * outer


def covariance_power_compositions(rho, h, f, m):
    _require_hn(rho, h)
    k = h.order
    total = to_scalar(0, rho.mode)
    for r in range(1, m + 1):
        inner = to_scalar(0, rho.mode)
        for js in _compositions(r, k):
            powers = [TensorFn._wrap(f.values**j, f.d, f.mode) for j in js]
            integrand = _product_on_axes(rho.d, k, list(zip(powers, range(k))), rho.mode)
            inner = inner + bracket_integrate(rho, TensorFn._wrap(integrand, rho.d, rho.mode) * h)
        total = total + _power_prefactor(rho, f, m, r) * inner
    return total / rising_factorial(rho.theta, m + k)


def covariance_power_k2(rho, h, f, m, diagonal_offset=-1):
    """The ``k = 2`` case split along ``rho^[2] = rho x rho + diagonal``.

    For each ``r`` the diagonal term ``int h(x,x) f(x)^r rho(dx)`` carries
    the coefficient ``r + diagonal_offset`` and the product-measure terms run
    over ``j = 1..r-1``.  Summing the compositions ``(j, r-j)`` gives ``r-1``
    diagonal contributions, which is the default.
    """
    _require_hn(rho, h)
    if h.order != 2:
        raise ValueError("h must have order 2")
    w = rho.weights
    diag = np.diagonal(h.values)
    total = to_scalar(0, rho.mode)
    for r in range(1, m + 1):
        term = (r + diagonal_offset) * (diag * f.values**r * w).sum()
        for j in range(1, r):
            a = f.values**j * w
            b = f.values ** (r - j) * w
            term = term + a @ h.values @ b
        total = total + _power_prefactor(rho, f, m, r) * term
    return total / rising_factorial(rho.theta, m + 2)


def orthogonality_suite(rho, max_deg=3, trials=50, seed=1):
    """Randomized exact checks of the orthogonality relations; see :mod:`dfcalc.suites`."""
    from .suites import orthogonality_suite as run

    return run(rho, max_deg=max_deg, trials=trials, seed=seed)
