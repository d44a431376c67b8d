"""Random rational test instances for the identity suites."""

from fractions import Fraction

import numpy as np

from .chaos import combine_palm
from .law import PolyFunctional, tfn
from .malliavin import CylinderFunction, RandomField
from .measure import FiniteMeasure, TensorFn, symmetrize
from .scalar import EXACT, FLOAT

THETAS = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(7, 3))


def rational(rng, lo=-4, hi=4, max_den=3):
    return Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, max_den + 1)))


def random_measure(rng, d, theta, zero_atoms=0, mode=EXACT):
    """Positive rational weights with total mass ``theta``.

    ``zero_atoms`` of the atoms (chosen at random, never all) get weight 0.
    """
    theta = Fraction(theta)
    raw = [int(rng.integers(1, 6)) for _ in range(d)]
    if zero_atoms:
        for i in rng.choice(d, size=min(zero_atoms, d - 1), replace=False):
            raw[int(i)] = 0
    total = sum(raw)
    weights = [theta * a / total for a in raw]
    rho = FiniteMeasure(weights, EXACT)
    return rho.astype(mode)


def random_tensor(rng, d, n, mode=EXACT):
    vals = np.empty((d,) * n, dtype=object)
    for idx in np.ndindex(*vals.shape):
        vals[idx] = rational(rng)
    t = TensorFn(vals, d=d, mode=EXACT)
    return t.astype(mode)


def random_symmetric(rng, d, n, mode=EXACT):
    return symmetrize(random_tensor(rng, d, n, mode))


def random_function(rng, d, mode=EXACT):
    return random_tensor(rng, d, 1, mode)


def random_poly(rng, d, max_deg, mode=EXACT, min_deg=0):
    """A functional with a random tensor in each degree ``0..max_deg``."""
    terms = {m: random_tensor(rng, d, m, mode) for m in range(min_deg, max_deg + 1)}
    return PolyFunctional(terms, d=d, mode=mode)


def project_top(rho, f):
    """The highest chaos kernel of ``zeta^n(f)``, an element of the ``n``-th kernel space."""
    n = f.order
    F = PolyFunctional.monomial(f)
    palm = [tfn(rho, F, j).values for j in range(n + 1)]
    return combine_palm(rho.theta, n, palm, rho.d, rho.mode)


def random_hn(rng, rho, n):
    """A random symmetric, conditionally centred tensor of order ``n``."""
    return project_top(rho, random_tensor(rng, rho.d, n, rho.mode))


def random_hn_combination(rng, basis):
    out = None
    for b in basis:
        term = b.scale(rational(rng))
        out = term if out is None else out + term
    return out


def random_sliced(rng, rho, prefix, n, basis_size=3):
    """Order ``prefix + n`` tensor whose slices in the last ``n`` arguments are centred."""
    d = rho.d
    if n == 0:
        return random_tensor(rng, d, prefix, rho.mode)
    basis = [random_hn(rng, rho, n) for _ in range(basis_size)]
    vals = np.empty((d,) * (prefix + n), dtype=object if rho.mode == EXACT else float)
    for idx in np.ndindex(*((d,) * prefix)):
        vals[idx] = random_hn_combination(rng, basis).values
    return TensorFn._wrap(vals, d, rho.mode)


def random_field(rng, rho, degrees):
    """A divergence-ready field with one random term per degree in ``degrees``."""
    terms = {n: random_sliced(rng, rho, 1, n) for n in degrees}
    return RandomField(terms, rho.d, rho.mode, divergence_ready=True)


def random_cylinder(rng, d, k=2, max_deg=3, mode=EXACT):
    fs = [random_function(rng, d, mode) for _ in range(k)]
    phi = {}
    for _ in range(4):
        exps = [0] * k
        for _ in range(int(rng.integers(0, max_deg + 1))):
            exps[int(rng.integers(0, k))] += 1
        phi[tuple(exps)] = phi.get(tuple(exps), 0) + rational(rng)
    if mode == FLOAT:
        phi = {e: float(c) for e, c in phi.items()}
    return CylinderFunction(phi, fs)


def random_phi(rng, k, max_deg):
    phi = {}
    for _ in range(4):
        exps = [0] * k
        for _ in range(int(rng.integers(0, max_deg + 1))):
            exps[int(rng.integers(0, k))] += 1
        phi[tuple(exps)] = phi.get(tuple(exps), 0) + rational(rng)
    return phi


def random_interior_point(rng, d):
    raw = [int(rng.integers(1, 8)) for _ in range(d)]
    total = sum(raw)
    return [Fraction(a, total) for a in raw]
