"""Polynomial functionals of a Dirichlet random measure and their expectations.

A polynomial functional is ``F(mu) = sum_m mu^m(g_m)`` where ``mu^m`` is the
product measure and each ``g_m`` is a symmetric function of ``m`` variables.
Only the values of ``g_m`` on multisets matter, so they are stored one value
per orbit of the coordinate permutations; dense tensors are rebuilt on demand.
"""

from functools import lru_cache

import numpy as np

from .measure import (
    FiniteMeasure,
    SimplexPoint,
    TensorFn,
    _encode,
    bracket_integrate,
    bracket_materialize,
    contract,
    orbit_sums,
    orbit_weights,
    symmetric_layout,
)
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


@lru_cache(maxsize=None)
def _product_map(d, a, b):
    """Orbit id in degree ``a+b`` of the union of orbit ``i`` (degree a) and ``j`` (degree b)."""
    la, lb, lab = symmetric_layout(d, a), symmetric_layout(d, b), symmetric_layout(d, a + b)
    na, nb = la.reps.shape[0], lb.reps.shape[0]
    merged = np.concatenate(
        [np.broadcast_to(la.reps[:, None, :], (na, nb, a)), np.broadcast_to(lb.reps[None, :, :], (na, nb, b))],
        axis=2,
    )
    codes = _encode(np.sort(merged, axis=2), d)
    out = np.searchsorted(_encode(lab.reps, d), codes)
    out.setflags(write=False)
    return out


class PolyFunctional:
    """``F(mu) = sum_m mu^m(g_m)`` with symmetric ``g_m``.

    ``terms`` maps a degree to a TensorFn of that order (or, for degree 0,
    a scalar).  Tensors are symmetrized on construction.
    """

    __slots__ = ("d", "mode", "_orbits")

    def __init__(self, terms, d=None, mode=None):
        terms = dict(terms)
        if mode is None:
            modes = {t.mode for t in terms.values() if isinstance(t, TensorFn)}
            if len(modes) > 1:
                raise ModeError("terms mix exact and float tensors")
            mode = modes.pop() if modes else EXACT
        check_mode(mode)
        if d is None:
            dims = {t.d for t in terms.values() if isinstance(t, TensorFn)}
            if len(dims) != 1:
                raise ValueError("cannot infer d; pass it explicitly")
            d = dims.pop()
        self.d = int(d)
        self.mode = mode
        self._orbits = {}
        for deg, t in terms.items():
            deg = int(deg)
            if not isinstance(t, TensorFn):
                t = TensorFn(t, d=self.d, mode=mode)
            if t.mode != mode:
                raise ModeError("terms mix exact and float tensors")
            if t.d != self.d:
                raise ValueError("terms have different d")
            if t.order != deg:
                raise ValueError(f"degree {deg} term has order {t.order}")
            lay = symmetric_layout(self.d, deg)
            vals = orbit_sums(t.values, lay, mode) / lay.sizes
            self._add_orbits(deg, vals)

    # internal constructors -------------------------------------------------

    @classmethod
    def _from_orbits(cls, orbits, d, mode):
        obj = cls.__new__(cls)
        obj.d = d
        obj.mode = mode
        obj._orbits = {}
        for deg, vals in orbits.items():
            obj._add_orbits(deg, vals)
        return obj

    def _add_orbits(self, deg, vals):
        vals = np.asarray(vals)
        if self.mode == FLOAT:
            vals = vals.astype(float)
        else:
            vals = vals.astype(object)
        if deg in self._orbits:
            vals = self._orbits[deg] + vals
        vals = np.array(vals, copy=True)
        vals.setflags(write=False)
        self._orbits[deg] = vals

    @classmethod
    def constant(cls, c, d, mode=EXACT):
        return cls({0: TensorFn.constant(c, d, 0, mode)}, d=d, mode=mode)

    @classmethod
    def zero(cls, d, mode=EXACT):
        return cls({}, d=d, mode=mode)

    @classmethod
    def monomial(cls, f):
        """The functional ``mu -> mu^m(f)``."""
        return cls({f.order: f}, d=f.d, mode=f.mode)

    # views -------------------------------------------------------------------

    @property
    def degrees(self):
        return sorted(self._orbits)

    @property
    def degree(self):
        """Largest degree carrying a nonzero tensor (0 for the zero functional)."""
        nz = [m for m, v in self._orbits.items() if any(x != 0 for x in v)]
        return max(nz, default=0)

    def term(self, deg):
        """Dense symmetric tensor of the given degree."""
        lay = symmetric_layout(self.d, deg)
        vals = self._orbits.get(deg)
        if vals is None:
            return TensorFn.zeros(self.d, deg, self.mode)
        return TensorFn._wrap(vals[lay.inverse].reshape((self.d,) * deg), self.d, self.mode)

    @property
    def terms(self):
        return {m: self.term(m) for m in self.degrees}

    def orbit_values(self, deg):
        vals = self._orbits.get(deg)
        if vals is None:
            return zeros(symmetric_layout(self.d, deg).reps.shape[0], self.mode)
        return vals

    def coefficients(self, deg):
        """Coefficients of the monomials ``prod_i p_i^{c_i}`` of total degree ``deg``."""
        return self.orbit_values(deg) * symmetric_layout(self.d, deg).sizes

    # arithmetic --------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, PolyFunctional):
            raise TypeError("expected a PolyFunctional")
        if other.mode != self.mode:
            raise ModeError("functional modes differ")
        if other.d != self.d:
            raise ValueError("functional dimensions differ")

    def __add__(self, other):
        self._check(other)
        out = PolyFunctional._from_orbits(self._orbits, self.d, self.mode)
        for deg, vals in other._orbits.items():
            out._add_orbits(deg, vals)
        return out

    def __neg__(self):
        return PolyFunctional._from_orbits({m: -v for m, v in self._orbits.items()}, self.d, self.mode)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = to_scalar(c, self.mode) if self.mode == EXACT else float(c)
        return PolyFunctional._from_orbits({m: v * c for m, v in self._orbits.items()}, self.d, self.mode)

    def __mul__(self, other):
        return poly_mul(self, other)

    def homogenized(self, degree):
        """Orbit values of the single degree-``degree`` tensor representing ``F`` on the simplex."""
        ones = PolyFunctional._from_orbits({0: to_array([1], self.mode)}, self.d, self.mode)
        out = zeros(symmetric_layout(self.d, degree).reps.shape[0], self.mode)
        for m, vals in self._orbits.items():
            if m > degree:
                if any(x != 0 for x in vals):
                    raise ValueError("target degree below the functional's degree")
                continue
            lift = poly_mul(
                PolyFunctional._from_orbits({m: vals}, self.d, self.mode),
                _all_ones(self.d, degree - m, self.mode) if degree > m else ones,
            )
            out = out + lift.orbit_values(degree)
        return out

    def restrict(self, mask):
        """The same functional on the sub-simplex of atoms in ``mask``."""
        idx = np.flatnonzero(np.asarray(mask, dtype=bool))
        terms = {}
        for m in self.degrees:
            vals = self.term(m).values
            if m:
                vals = vals[np.ix_(*([idx] * m))]
            terms[m] = TensorFn._wrap(vals, len(idx), self.mode)
        return PolyFunctional(terms, d=len(idx), mode=self.mode)

    def equals(self, other, support=None, rtol=None):
        """Equality as functions on the probability simplex.

        With ``support`` (a boolean mask) only measures carried by the masked
        atoms are compared.
        """
        self._check(other)
        a, b = self, other
        if support is not None and not np.all(support):
            a, b = a.restrict(support), b.restrict(support)
        top = max(a.degree, b.degree)
        return arrays_equal(a.homogenized(top), b.homogenized(top), self.mode, rtol)

    def __eq__(self, other):
        return isinstance(other, PolyFunctional) and other.mode == self.mode and other.d == self.d and self.equals(other)

    __hash__ = None

    def astype(self, mode):
        if mode == self.mode:
            return self
        return PolyFunctional({m: t.astype(mode) for m, t in self.terms.items()}, d=self.d, mode=mode)

    def __repr__(self):
        return f"PolyFunctional(d={self.d}, degrees={self.degrees}, mode={self.mode!r})"


def _all_ones(d, m, mode):
    lay = symmetric_layout(d, m)
    vals = to_array([1] * lay.reps.shape[0], mode)
    return PolyFunctional._from_orbits({m: vals}, d, mode)


def poly_mul(F, G):
    """Product of functionals, using ``mu^a(f) mu^b(g) = mu^{a+b}(f x g)``."""
    F._check(G)
    out = {}
    for a, va in F._orbits.items():
        ca = va * symmetric_layout(F.d, a).sizes
        for b, vb in G._orbits.items():
            cb = vb * symmetric_layout(F.d, b).sizes
            lab = symmetric_layout(F.d, a + b)
            acc = out.get(a + b)
            if acc is None:
                acc = zeros(lab.reps.shape[0], F.mode)
            np.add.at(acc, _product_map(F.d, a, b), np.multiply.outer(ca, cb))
            out[a + b] = acc
    orbits = {}
    for m, coef in out.items():
        vals = coef / symmetric_layout(F.d, m).sizes
        orbits[m] = vals
    return PolyFunctional._from_orbits(orbits, F.d, F.mode)


def poly_power(F, k):
    out = PolyFunctional.constant(1, F.d, F.mode)
    for _ in range(k):
        out = poly_mul(out, F)
    return out


def _check_mu(F, mu):
    if mu.d != F.d:
        raise ValueError("dimension mismatch")
    if mu.mode != F.mode:
        raise ModeError("functional and point modes differ")


def poly_eval(F, mu):
    """``sum_m mu^m(g_m)`` by contracting each tensor with ``mu`` axis by axis."""
    if not isinstance(mu, SimplexPoint):
        mu = SimplexPoint(mu, F.mode)
    _check_mu(F, mu)
    total = to_scalar(0, F.mode)
    for m in F.degrees:
        v = F.term(m).values
        while v.ndim:
            v = np.tensordot(v, mu.probs, axes=([v.ndim - 1], [0]))
        total = total + (v[()] if isinstance(v, np.ndarray) else v)
    return total


def _monomials(P, deg):
    """``(K, N)`` values of the degree-``deg`` monomials at the rows of ``P``."""
    lay = symmetric_layout(P.shape[1], deg)
    mono = np.ones((lay.counts.shape[0], P.shape[0]))
    for i in range(P.shape[1]):
        col = P[:, i]
        for e in range(1, deg + 1):
            rows = lay.counts[:, i] == e
            if rows.any():
                mono[rows] *= col**e
    return mono


def poly_eval_many(Fs, points):
    """Evaluate float functionals at each row of ``points``; returns shape ``(len(Fs), N)``.

    Monomials are computed once per degree and shared by all functionals.
    """
    P = np.asarray(points, dtype=float)
    Fs = list(Fs)
    if P.ndim != 2 or any(P.shape[1] != F.d for F in Fs):
        raise ValueError("points must have shape (N, d)")
    out = np.zeros((len(Fs), P.shape[0]))
    for m in sorted({m for F in Fs for m in F.degrees}):
        coef = np.array([np.asarray(F.coefficients(m), dtype=float) for F in Fs])
        out += coef @ _monomials(P, m) if m else coef[:, :1]
    return out


def poly_eval_batch(F, points):
    """Evaluate a float functional at each row of ``points`` (shape ``(N, d)``)."""
    return poly_eval_many([F], points)[0]


def expect_power(rho, f):
    """``E zeta^n(f) = rho^[n](f) / theta^(n)``."""
    if f.order == 0:
        return f.item()
    return bracket_integrate(rho, f) / rising_factorial(rho.theta, f.order)


def expect_poly(rho, F):
    """``E F(zeta) = sum_m rho^[m](g_m) / theta^(m)``."""
    if F.d != rho.d:
        raise ValueError("dimension mismatch")
    if F.mode != rho.mode:
        raise ModeError("measure and functional modes differ")
    total = to_scalar(0, F.mode)
    for m, vals in F._orbits.items():
        if m == 0:
            total = total + vals[0]
            continue
        lay = symmetric_layout(F.d, m)
        integral = (vals * lay.sizes * orbit_weights(rho, m)).sum()
        total = total + integral / rising_factorial(rho.theta, m)
    return total


def palm_shift(rho, points):
    """The directing measure ``rho + delta_{x_1} + ... + delta_{x_k}``."""
    return rho.shifted(points)


def tfn(rho, F, n):
    """Tensor of Palm expectations ``T(x_1..x_n) = E_{rho + delta_x}[F]``.

    The value depends only on the multiset of points, so one expectation is
    computed per multiset.
    """
    lay = symmetric_layout(rho.d, n)
    vals = np.empty(lay.reps.shape[0], dtype=object)
    for j, rep in enumerate(lay.reps):
        vals[j] = expect_poly(rho.shifted(rep), F)
    if rho.mode == FLOAT:
        vals = vals.astype(float)
    return TensorFn._wrap(vals[lay.inverse].reshape((rho.d,) * n), rho.d, rho.mode)


def mecke_check(rho, G, g, cap=DEFAULT_MEMORY_CAP):
    """Both sides of the Mecke equation for the integrand ``G(mu) g(x)``.

    ``lhs = E[G(zeta) zeta^n(g)]`` from the product functional and
    ``rhs = (1/theta^(n)) sum_x g(x) E_{rho+delta_x}[G] rho^[n]({x})``.
    Returns ``(lhs, rhs, holds)``.
    """
    n = g.order
    lhs = expect_poly(rho, poly_mul(G, PolyFunctional.monomial(g)))
    W = bracket_materialize(rho, n, cap)
    rhs = contract(W, g * tfn(rho, G, n)) / rising_factorial(rho.theta, n)
    if rho.mode == EXACT:
        holds = lhs == rhs
    else:
        holds = abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))
    return lhs, rhs, holds
