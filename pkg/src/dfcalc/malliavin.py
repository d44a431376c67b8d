"""Gradient, divergence, generator and related operators.

A random field ``H(mu, x) = sum_n mu^n(h_n(x, .))`` is stored as tensors of
order ``n + 1`` whose first axis is the point ``x``.  All operators act on
finite chaos expansions or polynomial functionals, so every identity between
them can be checked exactly.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import exp, factorial

import numpy as np

from .chaos import ChaosExpansion, chaos_inner, is_in_Hn, kernels_general, reconstruct
from .law import PolyFunctional, expect_poly, poly_mul, poly_power
from .measure import FiniteMeasure, SimplexPoint, TensorFn, bracket_integrate, symmetrize
from .scalar import EXACT, FLOAT, ModeError, rising_factorial, to_scalar, zeros


def _symmetrize_tail(values, d, mode):
    """Symmetrize every slice ``values[x]`` in its remaining arguments."""
    if values.ndim <= 2:
        return values
    out = np.empty_like(values)
    for x in range(d):
        out[x] = symmetrize(TensorFn._wrap(values[x], d, mode)).values
    return out


class RandomField:
    """``H(mu, x) = sum_n mu^n(h_n(x, .))``; term ``n`` has order ``n + 1``."""

    __slots__ = ("terms", "d", "mode", "divergence_ready")

    def __init__(self, terms, d, mode=EXACT, divergence_ready=None):
        self.d = int(d)
        self.mode = mode
        ts = {}
        for n, t in dict(terms).items():
            n = int(n)
            if not isinstance(t, TensorFn):
                t = TensorFn(t, d=self.d, mode=mode)
            if t.order != n + 1 or t.d != self.d:
                raise ValueError(f"field term {n} must have order {n + 1} and d={self.d}")
            if t.mode != mode:
                raise ModeError("field term modes differ")
            ts[n] = TensorFn._wrap(_symmetrize_tail(t.values, self.d, mode), self.d, mode)
        self.terms = dict(sorted(ts.items()))
        self.divergence_ready = divergence_ready

    @classmethod
    def zero(cls, d, mode=EXACT):
        return cls({}, d, mode)

    @classmethod
    def from_function(cls, h):
        """The deterministic field ``(mu, x) -> h(x)``."""
        return cls({0: h}, h.d, h.mode)

    def term(self, n):
        return self.terms.get(n, TensorFn.zeros(self.d, n + 1, self.mode))

    def at(self, x):
        """The functional ``mu -> H(mu, x)``."""
        x = int(x)
        terms = {n: TensorFn._wrap(t.values[x], self.d, self.mode) for n, t in self.terms.items()}
        return PolyFunctional(terms, d=self.d, mode=self.mode)

    def evaluate(self, mu, x):
        from .law import poly_eval

        return poly_eval(self.at(x), mu)

    def _check(self, other):
        if not isinstance(other, RandomField):
            raise TypeError("expected a RandomField")
        if other.mode != self.mode or other.d != self.d:
            raise ValueError("fields differ in mode or dimension")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for n, t in other.terms.items():
            terms[n] = terms[n] + t if n in terms else t
        return RandomField(terms, self.d, self.mode)

    def __neg__(self):
        return RandomField({n: -t for n, t in self.terms.items()}, self.d, self.mode)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return RandomField({n: t.scale(c) for n, t in self.terms.items()}, self.d, self.mode)

    def is_divergence_ready(self, rho):
        """True if every slice ``h_n(x, .)``, ``n >= 1``, is symmetric and centred.

        Points ``x`` of zero weight are skipped: the divergence never
        evaluates the field there.
        """
        for n, t in self.terms.items():
            if n == 0:
                continue
            for x in np.flatnonzero(rho.support):
                if not is_in_Hn(rho, TensorFn._wrap(t.values[x], self.d, self.mode)):
                    return False
        return True

    def equals(self, other, support=None, rtol=None):
        """Pointwise equality, atom by atom, as functionals on the simplex."""
        self._check(other)
        atoms = range(self.d) if support is None else np.flatnonzero(support)
        return all(self.at(x).equals(other.at(x), support=support, rtol=rtol) for x in atoms)

    def astype(self, mode):
        if mode == self.mode:
            return self
        return RandomField({n: t.astype(mode) for n, t in self.terms.items()}, self.d, mode)

    def __repr__(self):
        return f"RandomField(d={self.d}, orders={list(self.terms)}, mode={self.mode!r})"


def _outer_with_x(h, k):
    """``(x, y, z) -> h(x, y) k(x, z)`` for field tensors ``h`` and ``k``."""
    a, b = h.ndim - 1, k.ndim - 1
    hh = h.reshape(h.shape + (1,) * b)
    kk = k.reshape((k.shape[0],) + (1,) * a + k.shape[1:])
    return hh * kk


def field_times_functional(F, H):
    """The field ``(mu, x) -> F(mu) H(mu, x)``."""
    if F.d != H.d or F.mode != H.mode:
        raise ValueError("functional and field differ in mode or dimension")
    terms = {}
    for a, fa in F.terms.items():
        for n, hn in H.terms.items():
            t = np.multiply.outer(hn.values, fa.values)
            terms[a + n] = terms[a + n] + t if a + n in terms else t
    return RandomField({n: TensorFn._wrap(v, H.d, H.mode) for n, v in terms.items()}, H.d, H.mode)


def field_product(H, K):
    """The field ``(mu, x) -> H(mu, x) K(mu, x)``."""
    H._check(K)
    terms = {}
    for a, ha in H.terms.items():
        for b, kb in K.terms.items():
            t = _outer_with_x(ha.values, kb.values)
            terms[a + b] = terms[a + b] + t if a + b in terms else t
    return RandomField({n: TensorFn._wrap(v, H.d, H.mode) for n, v in terms.items()}, H.d, H.mode)


def field_integral(H):
    """The functional ``mu -> int H(mu, x) mu(dx) = sum_n mu^{n+1}(h_n)``."""
    return PolyFunctional({n + 1: t for n, t in H.terms.items()}, d=H.d, mode=H.mode)


def field_times_function(H, h):
    """The field ``(mu, x) -> H(mu, x) h(x)``."""
    return field_product(H, RandomField.from_function(h))


def campbell_inner(rho, H, K):
    """``E int H(zeta, x) K(zeta, x) zeta(dx)``.

    Computed atom by atom as ``sum_x E[zeta({x}) H(zeta, x) K(zeta, x)]``
    with products taken between symmetric functionals.
    """
    H._check(K)
    if H.d != rho.d:
        raise ValueError("dimension mismatch")
    total = to_scalar(0, rho.mode)
    for x in range(rho.d):
        mass = PolyFunctional.monomial(TensorFn.indicator((x,), rho.d, rho.mode))
        total = total + expect_poly(rho, poly_mul(poly_mul(H.at(x), K.at(x)), mass))
    return total


def gradient(rho, ce):
    """``x -> sum_n n (int f_n(x, y) zeta^{n-1}(dy) - zeta^n(f_n))``.

    The result is flagged with whether its slices are symmetric and centred.
    """
    d, mode = ce.d, ce.mode
    terms = {}
    ones = np.ones(d, dtype=int)
    for n, f in ce.kernels.items():
        first = f.values * n
        second = -np.multiply.outer(ones, f.values) * n
        terms[n - 1] = terms[n - 1] + first if n - 1 in terms else first
        terms[n] = terms[n] + second if n in terms else second
    field = RandomField({k: TensorFn._wrap(v, d, mode) for k, v in terms.items()}, d, mode)
    field.divergence_ready = field.is_divergence_ready(rho)
    return field


def gradient_isometry_rhs(rho, ceF, ceG):
    """``sum_n (theta+n-1) n n!/theta^(2n) rho^[n](f_n g_n)``."""
    theta = rho.theta
    total = to_scalar(0, rho.mode)
    for n in sorted(set(ceF.kernels) & set(ceG.kernels)):
        integral = bracket_integrate(rho, ceF.kernels[n] * ceG.kernels[n])
        total = total + (theta + n - 1) * n * factorial(n) * integral / rising_factorial(theta, 2 * n)
    return total


def make_divergence_ready(rho, H):
    """An equal field whose slices are symmetric and centred.

    Each functional ``mu -> H(mu, x)`` is replaced by its chaos expansion, so
    the field is unchanged as a function of ``(mu, x)``.
    """
    d, mode = H.d, H.mode
    expansions = [kernels_general(rho, H.at(x)) for x in range(d)]
    top = max((ce.max_order for ce in expansions), default=0)
    terms = {0: TensorFn._wrap(np.array([ce.f0 for ce in expansions], dtype=object if mode == EXACT else float), d, mode)}
    for n in range(1, top + 1):
        terms[n] = TensorFn._wrap(np.stack([ce.kernel(n).values for ce in expansions]), d, mode)
    return RandomField(terms, d, mode, divergence_ready=True)


def _dirac_integral(rho, h):
    """``y -> int h(x, y) (rho + delta_{y_1} + ... + delta_{y_n})(dx)``."""
    v = h.values
    n = v.ndim - 1
    out = np.tensordot(rho.weights, v, axes=([0], [0]))
    for i in range(n):
        diag = np.diagonal(v, axis1=0, axis2=i + 1)
        out = out + np.moveaxis(diag, -1, i)
    return out


def divergence(rho, H, check=True):
    """``sum_n [(theta+n) zeta^{n+1}(h_n) - int int h_n(x, y) (rho + delta_y)(dx) zeta^n(dy)]``.

    Fields whose slices are not symmetric and centred are rejected; use
    :func:`make_divergence_ready` to convert them first.
    """
    if H.d != rho.d or H.mode != rho.mode:
        raise ValueError("measure and field differ in mode or dimension")
    if check and not H.is_divergence_ready(rho):
        raise ValueError("field slices must be symmetric and centred")
    theta = rho.theta
    out = PolyFunctional.zero(rho.d, rho.mode)
    for n, h in H.terms.items():
        top = PolyFunctional({n + 1: h.scale(theta + n)}, d=rho.d, mode=rho.mode)
        low = PolyFunctional({n: TensorFn._wrap(_dirac_integral(rho, h), rho.d, rho.mode)}, d=rho.d, mode=rho.mode)
        out = out + top - low
    return out


def generator_L(rho, ce):
    """``LF = -sum_n (theta+n-1) n zeta^n(f_n)``."""
    theta = rho.theta
    return ce.map_kernels(lambda n, k: k.scale(-(theta + n - 1) * n), f0=to_scalar(0, ce.mode))


def delta_nabla_check(rho, ce):
    """Compare the divergence of the gradient with ``-LF``; returns ``(lhs, rhs, holds)``."""
    grad = make_divergence_ready(rho, gradient(rho, ce))
    lhs = divergence(rho, grad)
    rhs = -reconstruct(rho, generator_L(rho, ce))
    return lhs, rhs, lhs.equals(rhs)


def semigroup(rho, ce, t):
    """Damp kernel ``n`` by ``exp(-n (theta+n-1) t)``; works in float mode."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    ce = ce.astype(FLOAT)
    theta = float(rho.theta)
    return ce.map_kernels(lambda n, k: k.scale(exp(-n * (theta + n - 1) * t)))


def mutation(rho, f):
    """``(Af)(x) = rho(f) - theta f(x)``."""
    return TensorFn._wrap(rho.integrate(f) - rho.theta * f.values, f.d, f.mode)


def dirichlet_form(rho, ceF, ceG):
    """``E int grad F grad G dzeta``."""
    return campbell_inner(rho, gradient(rho, ceF), gradient(rho, ceG))


# ---------------------------------------------------------------------------
# cylinder functions


class CylinderFunction:
    """``F(mu) = phi(mu(f_1), ..., mu(f_k))`` with a polynomial ``phi``.

    ``phi`` maps exponent tuples of length ``k`` to coefficients.
    """

    __slots__ = ("phi", "fs", "d", "mode")

    def __init__(self, phi, fs):
        self.fs = list(fs)
        if not self.fs:
            raise ValueError("need at least one function")
        self.d = self.fs[0].d
        self.mode = self.fs[0].mode
        for f in self.fs:
            if f.order != 1 or f.d != self.d or f.mode != self.mode:
                raise ValueError("functions must be one-variable with equal d and mode")
        k = len(self.fs)
        clean = {}
        for exps, c in dict(phi).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != k or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps}")
            c = to_scalar(c, self.mode)
            if c != 0:
                clean[exps] = clean.get(exps, 0) + c
        self.phi = clean

    @property
    def k(self):
        return len(self.fs)

    def derivative(self, i):
        """``d phi / d u_i`` as a cylinder function over the same ``fs``."""
        out = {}
        for exps, c in self.phi.items():
            if exps[i]:
                e = list(exps)
                e[i] -= 1
                out[tuple(e)] = c * exps[i]
        return CylinderFunction(out, self.fs)

    def phi_at(self, u):
        total = to_scalar(0, self.mode)
        for exps, c in self.phi.items():
            term = c
            for ui, e in zip(u, exps):
                term = term * ui**e
            total = total + term
        return total

    def evaluate(self, mu):
        probs = mu.probs if isinstance(mu, SimplexPoint) else np.asarray(mu)
        return self.phi_at([np.dot(f.values, probs) for f in self.fs])

    def to_poly(self):
        """Expand into a polynomial functional."""
        linear = [PolyFunctional.monomial(f) for f in self.fs]
        out = PolyFunctional.zero(self.d, self.mode)
        for exps, c in self.phi.items():
            term = PolyFunctional.constant(1, self.d, self.mode)
            for L, e in zip(linear, exps):
                if e:
                    term = poly_mul(term, poly_power(L, e))
            out = out + term.scale(c)
        return out


def compose(phi, Fs):
    """``phi(F_1, ..., F_k)`` for a polynomial ``phi`` and functionals ``F_i``."""
    d, mode = Fs[0].d, Fs[0].mode
    out = PolyFunctional.zero(d, mode)
    for exps, c in phi.items():
        term = PolyFunctional.constant(1, d, mode)
        for F, e in zip(Fs, exps):
            if e:
                term = poly_mul(term, poly_power(F, e))
        out = out + term.scale(to_scalar(c, mode))
    return out


def derivative_poly(phi, i):
    out = {}
    for exps, c in phi.items():
        if exps[i]:
            e = list(exps)
            e[i] -= 1
            out[tuple(e)] = c * exps[i]
    return out


def gradient_pathwise(cyl, mu, x):
    """``sum_i d_i phi(mu(f)) (f_i(x) - mu(f_i))``."""
    probs = mu.probs if isinstance(mu, SimplexPoint) else np.asarray(mu)
    u = [np.dot(f.values, probs) for f in cyl.fs]
    total = to_scalar(0, cyl.mode)
    for i, f in enumerate(cyl.fs):
        total = total + cyl.derivative(i).phi_at(u) * (f.values[int(x)] - u[i])
    return total


def flemingviot_generator(rho, cyl):
    """The second-order Fleming-Viot operator on a cylinder polynomial.

    ``1/2 sum_ij d_ij phi Cov_mu(f_i, f_j) + 1/2 sum_i d_i phi mu(A f_i)``,
    returned as a polynomial functional.
    """
    half = Fraction(1, 2) if cyl.mode == EXACT else 0.5
    linear = [PolyFunctional.monomial(f) for f in cyl.fs]
    out = PolyFunctional.zero(cyl.d, cyl.mode)
    for i, fi in enumerate(cyl.fs):
        di = cyl.derivative(i)
        drift = poly_mul(di.to_poly(), PolyFunctional.monomial(mutation(rho, fi)))
        out = out + drift.scale(half)
        for j, fj in enumerate(cyl.fs):
            dij = di.derivative(j)
            if not dij.phi:
                continue
            cov = PolyFunctional.monomial(fi * fj) - poly_mul(linear[i], linear[j])
            out = out + poly_mul(dij.to_poly(), cov).scale(half)
    return out


# ---------------------------------------------------------------------------
# Poincare inequality


@dataclass(frozen=True)
class PoincareResult:
    variance: object
    energy_over_theta: object
    holds: bool
    equality: bool
    first_chaos_only: bool
    note: str = ""


def poincare_check(rho, ce):
    """Compare ``Var F`` with ``E int (grad F)^2 dzeta / theta``.

    ``first_chaos_only`` reports whether all kernels of order two and more
    vanish on the support; equality is expected exactly in that case.
    For a constant functional both sides are zero and the note says so.
    """
    var = chaos_inner(rho, ce, ce) - ce.f0 * ce.f0
    energy = dirichlet_form(rho, ce, ce) / rho.theta
    mode = rho.mode
    if mode == EXACT:
        holds = var <= energy
        equality = var == energy
    else:
        tol = 1e-9 * max(1.0, abs(energy))
        holds = var <= energy + tol
        equality = abs(var - energy) <= tol
    higher = [n for n in ce.kernels if n >= 2 and bracket_integrate(rho, ce.kernels[n] * ce.kernels[n]) != 0]
    first_only = not higher
    note = ""
    if var == 0 and energy == 0:
        note = "first-chaos-only vacuously"
    return PoincareResult(var, energy, bool(holds), bool(equality), first_only, note)
