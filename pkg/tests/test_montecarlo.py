from fractions import Fraction

import numpy as np
import pytest

from dfcalc.law import PolyFunctional, expect_poly
from dfcalc.measure import FiniteMeasure, SimplexPoint, TensorFn
from dfcalc.montecarlo import (
    BLOCK_SIZE,
    McEstimate,
    block_rng,
    draw,
    gamma_variates,
    leftover_mass_bound,
    mc_expect,
    mc_expect_many,
    polya_urn,
    polya_urn_batch,
    sample_dirichlet,
    sample_dirichlet_batch,
    sample_stick_breaking,
    sample_stick_breaking_batch,
)
from dfcalc.scalar import FLOAT

from conftest import linear, vec


def test_single_atom_is_a_point_mass():
    rho = FiniteMeasure([3])
    rng = np.random.default_rng(0)
    assert list(sample_dirichlet(rho, rng).probs) == [1.0]
    assert sample_stick_breaking(rho, rng).probs == pytest.approx([1.0])


def test_null_atom_gets_no_mass():
    rho = FiniteMeasure([0, 1])
    rng = np.random.default_rng(0)
    P = sample_dirichlet_batch(rho, 100, rng)
    assert (P[:, 0] == 0).all() and np.allclose(P[:, 1], 1)
    S = sample_stick_breaking_batch(rho, 100, rng)
    assert (S[:, 0] == 0).all()


@pytest.mark.parametrize("sampler", ["gamma", "stick"])
def test_draws_lie_on_simplex(sampler):
    rho = FiniteMeasure(["1/2", 2, "1/3"])
    P = draw(rho, 1000, seed=3, sampler=sampler)
    assert P.shape == (1000, 3)
    assert (P >= 0).all()
    assert np.abs(P.sum(axis=1) - 1).max() < 1e-12
    SimplexPoint(P[0], FLOAT)


def test_seed_determinism_and_block_prefix():
    rho = FiniteMeasure([1, 1, 2])
    a = draw(rho, 2 * BLOCK_SIZE, seed=9)
    b = draw(rho, 2 * BLOCK_SIZE, seed=9)
    c = draw(rho, BLOCK_SIZE, seed=9)
    assert (a == b).all()
    assert (a[:BLOCK_SIZE] == c).all()
    assert not (draw(rho, 10, seed=10) == a[:10]).all()


def test_block_streams_differ():
    x = block_rng(5, 0).random(4)
    y = block_rng(5, 1).random(4)
    assert not np.array_equal(x, y)
    assert np.array_equal(x, block_rng(5, 0).random(4))


def test_small_shape_gamma_has_right_mean():
    rng = np.random.default_rng(1)
    g = gamma_variates(0.3, 200_000, rng)
    assert (g >= 0).all()
    assert abs(g.mean() - 0.3) < 4 * np.sqrt(0.3 / 200_000)
    assert (gamma_variates(0.0, 5, rng) == 0).all()


def test_constant_functional_is_exact():
    rho = FiniteMeasure([1, 2])
    est = mc_expect(rho, PolyFunctional.constant(3, 2), 1000, seed=1)
    assert est.mean == 3.0 and est.std_error == 0.0
    assert est.z_score(3) == 0.0


@pytest.mark.parametrize("sampler", ["gamma", "stick"])
def test_estimates_agree_with_exact(sampler):
    rho = FiniteMeasure(["1/2", 1, "3/2"])
    Fs = [linear(vec(1, 0, 0)), linear(TensorFn.indicator((0, 1), 3)), linear(TensorFn.indicator((2, 2, 2), 3))]
    ests = mc_expect_many(rho, Fs, 100_000, seed=4, sampler=sampler)
    for F, est in zip(Fs, ests):
        assert abs(est.z_score(expect_poly(rho, F))) < 4


def test_one_stick_truncation_is_biased(uniform2):
    # one stick plus the remainder: E[zeta_0^2] = 5/12 instead of 1/3
    rng = np.random.default_rng(2)
    P = sample_stick_breaking_batch(uniform2, 100_000, rng, trunc=1)
    second = (P[:, 0] ** 2).mean()
    se = (P[:, 0] ** 2).std() / np.sqrt(P.shape[0])
    assert abs(second - 5 / 12) < 4 * se
    assert abs(second - 1 / 3) > 10 * se
    assert leftover_mass_bound(uniform2, 1) == pytest.approx(2 / 3)


def test_polya_urn_limits():
    rho = FiniteMeasure([1, 1])
    rng = np.random.default_rng(3)
    X = polya_urn_batch(rho, 2000, 2000, rng)[:, 0]
    assert abs(X.mean() - 0.5) < 4 * np.sqrt(1 / 12 / 2000)
    p = polya_urn(rho, 10, rng)
    assert p.probs.sum() == pytest.approx(1.0)


def test_report_fields():
    est = McEstimate(0.5, 0.01, 100, 7)
    rep = est.report(Fraction(1, 2))
    assert rep == {"mean": 0.5, "std_error": 0.01, "n": 100, "seed": 7, "exact_ref": 0.5, "z_score": 0.0}
    assert est.as_dict()["sampler"] == "gamma"


def test_argument_errors(uniform2):
    with pytest.raises(ValueError):
        mc_expect(uniform2, linear(vec(1, 0)), 0, seed=1)
    with pytest.raises(ValueError):
        sample_stick_breaking_batch(uniform2, 1, np.random.default_rng(0), trunc=0)
    with pytest.raises(ValueError):
        polya_urn_batch(uniform2, 0, 1, np.random.default_rng(0))
    with pytest.raises(KeyError):
        draw(uniform2, 10, seed=1, sampler="nope")
