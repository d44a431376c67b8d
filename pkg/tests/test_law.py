from fractions import Fraction

import numpy as np
import pytest

from dfcalc.law import (
    PolyFunctional,
    expect_poly,
    expect_power,
    mecke_check,
    palm_shift,
    poly_eval,
    poly_eval_batch,
    poly_mul,
    poly_power,
    tfn,
)
from dfcalc.measure import FiniteMeasure, SimplexPoint, TensorFn, bracket_integrate, symmetrize
from dfcalc.scalar import FLOAT, ModeError

from conftest import linear, vec


def dirichlet_moment(weights, counts):
    """``E prod_i zeta_i^{k_i}`` for a Dirichlet vector, by the product formula."""
    theta = sum(weights)
    num, den = Fraction(1), Fraction(1)
    for w, k in zip(weights, counts):
        for j in range(k):
            num *= w + j
    for j in range(sum(counts)):
        den *= theta + j
    return num / den


# evaluation


def test_poly_eval_examples():
    F = PolyFunctional.constant(3, 2)
    assert poly_eval(F, ["1/2", "1/2"]) == 3
    g = vec(1, 0)
    assert poly_eval(linear(g), ["1/2", "1/2"]) == Fraction(1, 2)
    f2 = TensorFn.indicator((0, 0), 2)
    assert poly_eval(linear(f2), SimplexPoint(["1/3", "2/3"])) == Fraction(1, 9)


def test_poly_is_symmetrized_on_construction():
    f = TensorFn.indicator((0, 1), 2)
    F = linear(f)
    assert F.term(2) == symmetrize(f)
    assert poly_eval(F, ["1/3", "2/3"]) == Fraction(2, 9)


def test_poly_arithmetic(rng):
    g, h = vec(1, -2, 3), vec(0, 1, 1)
    G, H = linear(g), linear(h)
    mu = ["1/6", "1/3", "1/2"]
    assert poly_eval(G + H, mu) == poly_eval(G, mu) + poly_eval(H, mu)
    assert poly_eval(poly_mul(G, H), mu) == poly_eval(G, mu) * poly_eval(H, mu)
    assert poly_eval(poly_power(G, 3), mu) == poly_eval(G, mu) ** 3
    assert poly_eval(G.scale(Fraction(5, 2)), mu) == Fraction(5, 2) * poly_eval(G, mu)


def test_homogenized_agrees_on_simplex():
    F = PolyFunctional.constant(2, 2) + linear(vec(1, 3)) + linear(TensorFn.indicator((1, 1), 2))
    H = PolyFunctional._from_orbits({3: F.homogenized(3)}, 2, F.mode)
    for mu in (["1/2", "1/2"], ["1/5", "4/5"], [0, 1]):
        assert poly_eval(H, mu) == poly_eval(F, mu)


def test_batch_eval_matches_exact():
    F = PolyFunctional.constant(1, 3) + linear(vec(1, 2, 3)) + linear(TensorFn.indicator((0, 2), 3))
    pts = np.array([[0.2, 0.3, 0.5], [1.0, 0.0, 0.0], [0.1, 0.1, 0.8]])
    Ff = F.astype(FLOAT)
    out = poly_eval_batch(Ff, pts)
    for p, v in zip(pts, out):
        assert v == pytest.approx(poly_eval(Ff, p))


def test_eval_rejects_bad_input():
    F = linear(vec(1, 0))
    with pytest.raises(ValueError):
        poly_eval(F, ["1/3", "1/3", "1/3"])
    with pytest.raises(ModeError):
        poly_eval(F, SimplexPoint([0.5, 0.5], FLOAT))


# expectations


def test_expect_power_beta(uniform2):
    assert expect_power(uniform2, vec(1, 0)) == Fraction(1, 2)
    assert expect_power(uniform2, TensorFn.indicator((0, 0), 2)) == Fraction(1, 3)


@pytest.mark.parametrize("weights", [(1, 1), ("1/2", "3/2", 2), ("7/3", "1/3")])
def test_expectations_match_dirichlet_moments(weights):
    rho = FiniteMeasure(weights)
    d = rho.d
    for point in [(0,), (0, 0), (0, 1 % d), (1 % d, 1 % d, 0), (0, 0, 0, 1 % d)]:
        counts = [point.count(i) for i in range(d)]
        got = expect_power(rho, TensorFn.indicator(point, d))
        assert got == dirichlet_moment(rho.weights, counts)


def test_expect_poly_is_linear(uniform2):
    F = PolyFunctional.constant(2, 2) + linear(vec(1, 0)).scale(6)
    assert expect_poly(uniform2, F) == 2 + 3


def test_expect_poly_modes(uniform2):
    F = linear(vec(1, 0))
    with pytest.raises(ModeError):
        expect_poly(uniform2.astype(FLOAT), F)
    assert expect_poly(uniform2.astype(FLOAT), F.astype(FLOAT)) == pytest.approx(0.5)


# Palm shifts and the T-tensors


def test_palm_shift_examples(uniform2):
    assert list(palm_shift(uniform2, [0]).weights) == [2, 1]
    assert list(palm_shift(uniform2, [1, 1]).weights) == [1, 3]


def test_tfn_linear_example():
    rho = FiniteMeasure([Fraction(1, 2), 1, Fraction(3, 2)])
    g = vec(2, -1, 5)
    T1 = tfn(rho, linear(g), 1)
    for x in range(3):
        assert T1.values[x] == (rho.integrate(g) + g.values[x]) / (rho.theta + 1)


def test_tfn_order_one_integrates_to_order_zero(rng):
    rho = FiniteMeasure([Fraction(1, 3), 2, 1])
    F = linear(vec(1, 2, 0)) + linear(TensorFn.indicator((1, 2), 3)) + PolyFunctional.constant(4, 3)
    T0 = tfn(rho, F, 0).item()
    T1 = tfn(rho, F, 1)
    assert rho.integrate(T1) == rho.theta * T0
    assert T0 == expect_poly(rho, F)


def test_tfn_is_symmetric():
    rho = FiniteMeasure([1, 2, 3])
    F = linear(TensorFn.indicator((0, 1, 1), 3))
    T2 = tfn(rho, F, 2).values
    assert (T2 == T2.T).all()


# Mecke equation


def test_mecke_example(uniform2):
    lhs_total, rhs_total = 0, 0
    for y in range(2):
        one_y = TensorFn.indicator((y,), 2)
        lhs, rhs, ok = mecke_check(uniform2, linear(one_y), one_y)
        assert ok
        lhs_total += lhs
        rhs_total += rhs
    assert lhs_total == rhs_total == Fraction(2, 3)


def test_mecke_constant_integrand(uniform2):
    g = vec(3, -1)
    lhs, rhs, ok = mecke_check(uniform2, PolyFunctional.constant(1, 2), g)
    assert ok and lhs == expect_power(uniform2, g)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mecke_higher_order(n, rng):
    rho = FiniteMeasure([Fraction(1, 2), 1, Fraction(5, 3)])
    vals = np.empty((3,) * n, dtype=object)
    for idx in np.ndindex(*vals.shape):
        vals[idx] = Fraction(int(rng.integers(-3, 4)))
    g = TensorFn(vals, d=3)
    G = linear(vec(1, 2, -1)) + linear(TensorFn.indicator((0, 2), 3))
    assert mecke_check(rho, G, g)[2]
