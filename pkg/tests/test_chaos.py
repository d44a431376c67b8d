from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from dfcalc.chaos import (
    ChaosExpansion,
    chaos_inner,
    covariance_chaos,
    covariance_power,
    covariance_power_compositions,
    covariance_power_k2,
    is_in_Hn,
    kernels_general,
    kernels_monomial,
    reconstruct,
    variance,
)
from dfcalc.law import PolyFunctional, expect_poly, poly_mul, poly_power
from dfcalc.measure import FiniteMeasure, TensorFn, bracket_integrate, bracket_materialize, contract
from dfcalc.randgen import random_hn, random_poly, random_tensor
from dfcalc.scalar import FLOAT, rising_factorial

from conftest import linear, vec

HALF = vec("1/2", "-1/2")


def brute_covariance(rho, A, B):
    return expect_poly(rho, poly_mul(A, B)) - expect_poly(rho, A) * expect_poly(rho, B)


# kernel spaces


def test_is_in_Hn_examples(uniform2):
    assert is_in_Hn(uniform2, HALF)
    assert not is_in_Hn(uniform2, vec(1, 0))
    assert not is_in_Hn(uniform2, TensorFn.indicator((0, 1), 2))
    with pytest.raises(ValueError):
        is_in_Hn(uniform2, TensorFn.constant(1, 2, 0))


def test_is_in_Hn_second_order():
    rho = FiniteMeasure([1, 1])
    # centred in the last variable against rho + delta_x
    h = TensorFn(np.array([[Fraction(1), Fraction(-2)], [Fraction(-2), Fraction(1)]], dtype=object))
    assert is_in_Hn(rho, h)
    assert not is_in_Hn(rho, h + TensorFn.constant(1, 2, 2))


def test_is_in_Hn_ignores_null_atoms():
    rho = FiniteMeasure([1, 0, 1])
    g = vec("1/2", 99, "-1/2")
    assert is_in_Hn(rho, g)


# kernels


def test_kernels_of_linear_functional(uniform2):
    ce = kernels_general(uniform2, linear(vec(1, 0)))
    assert ce.f0 == Fraction(1, 2)
    assert ce.kernels[1] == HALF
    assert reconstruct(uniform2, ce).equals(linear(vec(1, 0)))


def test_degree_two_has_no_third_kernel(uniform2):
    F = linear(TensorFn.indicator((0, 0), 2))
    ce = kernels_general(uniform2, F, max_order=3)
    assert all(v == 0 for v in ce.kernels[3].flat)
    assert is_in_Hn(uniform2, ce.kernels[2])


@pytest.mark.parametrize("weights", [(1, 1), ("1/2", 2, "1/3"), ("7/3", 1, 1, "1/2")])
def test_round_trip_and_routes_agree(weights):
    rng = np.random.default_rng(7)
    rho = FiniteMeasure(weights)
    for _ in range(3):
        F = random_poly(rng, rho.d, 3)
        ce = kernels_general(rho, F)
        for n, k in ce.kernels.items():
            assert is_in_Hn(rho, k)
        assert reconstruct(rho, ce).equals(F)
        f = random_tensor(rng, rho.d, 3)
        assert kernels_monomial(rho, f).equals(kernels_general(rho, linear(f)))


def test_reconstruct_rejects_bad_kernel(uniform2):
    ce = ChaosExpansion(0, {1: vec(1, 0)}, 2)
    with pytest.raises(ValueError):
        reconstruct(uniform2, ce)


def test_float_kernels_match_exact():
    rho = FiniteMeasure(["1/2", 1, "3/2"])
    F = random_poly(np.random.default_rng(3), 3, 3)
    exact = kernels_general(rho, F)
    approx = kernels_general(rho.astype(FLOAT), F.astype(FLOAT))
    assert approx.equals(exact.astype(FLOAT), rtol=1e-10)


# isometry and variance


def test_variance_of_uniform_coordinate(uniform2):
    ce = kernels_general(uniform2, linear(vec(1, 0)))
    assert variance(uniform2, ce) == Fraction(1, 12)


def test_constant_has_zero_variance(uniform2):
    ce = kernels_general(uniform2, PolyFunctional.constant(5, 2))
    assert variance(uniform2, ce) == 0


def test_isometry_against_direct_expectation():
    rng = np.random.default_rng(11)
    rho = FiniteMeasure(["1/2", "3/2", 1])
    F, G = random_poly(rng, 3, 3), random_poly(rng, 3, 2)
    inner = chaos_inner(rho, kernels_general(rho, F), kernels_general(rho, G))
    assert inner == expect_poly(rho, poly_mul(F, G))


def test_kernel_orthogonality_example(uniform2):
    # rho^[2](g x h) against 1! rho(gh); both equal 1/2
    lhs = contract(bracket_materialize(uniform2, 2), HALF.outer(HALF))
    rhs = factorial(1) * bracket_integrate(uniform2, HALF * HALF)
    assert lhs == rhs == Fraction(1, 2)


@pytest.mark.parametrize("m, n", [(1, 2), (2, 1), (2, 3), (1, 3)])
def test_different_orders_are_orthogonal(m, n):
    rng = np.random.default_rng(m * 10 + n)
    rho = FiniteMeasure([Fraction(2, 3), 1, Fraction(1, 2)])
    g, h = random_hn(rng, rho, m), random_hn(rng, rho, n)
    assert expect_poly(rho, poly_mul(linear(g), linear(h))) == 0


# covariance formulas


def test_covariance_lower_order_vanishes():
    rng = np.random.default_rng(5)
    rho = FiniteMeasure([1, Fraction(1, 2), 2])
    h = random_hn(rng, rho, 3)
    hs = [random_tensor(rng, 3, 1) for _ in range(2)]
    assert covariance_chaos(rho, h, hs) == 0


def test_covariance_with_constant_is_zero():
    rng = np.random.default_rng(6)
    rho = FiniteMeasure([1, 2])
    h = random_hn(rng, rho, 1)
    assert covariance_chaos(rho, h, [TensorFn.constant(1, 2, 1)] * 3) == 0


@pytest.mark.parametrize("k, m", [(1, 1), (1, 3), (2, 2), (2, 3), (3, 3), (3, 4)])
def test_covariance_chaos_brute_force(k, m):
    rng = np.random.default_rng(100 + 10 * k + m)
    rho = FiniteMeasure([Fraction(1, 2), 1, Fraction(7, 3)])
    h = random_hn(rng, rho, k)
    hs = [random_tensor(rng, 3, 1) for _ in range(m)]
    prod = PolyFunctional.constant(1, 3)
    for g in hs:
        prod = poly_mul(prod, linear(g))
    assert covariance_chaos(rho, h, hs) == brute_covariance(rho, linear(h), prod)


@pytest.mark.parametrize("k, m", [(1, 2), (2, 1), (2, 3), (2, 4), (3, 3)])
def test_covariance_power_brute_force(k, m):
    rng = np.random.default_rng(200 + 10 * k + m)
    rho = FiniteMeasure([1, Fraction(1, 3), Fraction(3, 2)])
    h, f = random_hn(rng, rho, k), random_tensor(rng, 3, 1)
    expected = brute_covariance(rho, linear(h), poly_power(linear(f), m))
    assert covariance_power(rho, h, f, m) == expected
    assert covariance_power_compositions(rho, h, f, m) == expected


def test_covariance_k2_with_diagonal_weight_r_plus_one_fails():
    """A diagonal weight of ``r + 1`` (rather than ``r - 1``) disagrees with brute force."""
    rng = np.random.default_rng(17)
    rho = FiniteMeasure([1, Fraction(1, 2), 2])
    h, f = random_hn(rng, rho, 2), random_tensor(rng, 3, 1)
    m = 3
    expected = brute_covariance(rho, linear(h), poly_power(linear(f), m))
    assert covariance_power_k2(rho, h, f, m) == expected
    assert covariance_power_k2(rho, h, f, m, diagonal_offset=1) != expected


def test_covariance_requires_kernel_space(uniform2):
    with pytest.raises(ValueError):
        covariance_chaos(uniform2, vec(1, 0), [vec(1, 1)])
