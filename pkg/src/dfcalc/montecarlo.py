"""Samplers for the Dirichlet law and Monte Carlo estimates of expectations.

Random numbers come from Philox streams keyed by the user seed.  Samples are
produced in fixed-size blocks and block ``b`` always uses counter ``b``, so a
sample depends only on ``(seed, index)`` and not on how the work is split.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .law import poly_eval_many
from .measure import SimplexPoint
from .scalar import FLOAT

#: samples per counter block
BLOCK_SIZE = 8192


def block_rng(seed, block):
    """Generator for block ``block`` of the stream keyed by ``seed``."""
    key = int(seed) % 2**64
    return np.random.Generator(np.random.Philox(key=key, counter=int(block) << 128))


def _float_weights(rho):
    w = np.array([float(v) for v in rho.weights])
    if not w.sum() > 0:
        raise ValueError("total mass theta must be positive")
    return w


def gamma_variates(shape, size, rng):
    """Gamma(shape, 1) draws; shapes below 1 use a boosted draw ``G(a+1) U^(1/a)``.

    A zero shape gives exact zeros.
    """
    shape = float(shape)
    if shape == 0.0:
        return np.zeros(size)
    if shape >= 1.0:
        return rng.standard_gamma(shape, size)
    boosted = rng.standard_gamma(shape + 1.0, size)
    return boosted * rng.random(size) ** (1.0 / shape)


def sample_dirichlet_batch(rho, n, rng):
    """``n`` draws from Di(rho) as rows of an ``(n, d)`` array."""
    w = _float_weights(rho)
    G = np.column_stack([gamma_variates(a, n, rng) for a in w])
    return G / G.sum(axis=1, keepdims=True)


def sample_dirichlet(rho, rng):
    """One draw from Di(rho) by normalizing independent Gamma variables."""
    return SimplexPoint(sample_dirichlet_batch(rho, 1, rng)[0], FLOAT)


def sample_stick_breaking_batch(rho, n, rng, trunc=200):
    """``n`` truncated stick-breaking draws.

    Stick fractions are Beta(1, theta), drawn as ``1 - U^(1/theta)``, and
    atoms are drawn from ``rho/theta``.  The mass left after ``trunc`` sticks
    goes to one further atom draw.
    """
    if trunc < 1:
        raise ValueError("trunc must be at least 1")
    w = _float_weights(rho)
    theta = w.sum()
    V = -np.expm1(np.log(rng.random((n, trunc))) / theta)
    remaining = np.cumprod(1.0 - V, axis=1)
    sticks = np.empty((n, trunc + 1))
    sticks[:, 0] = V[:, 0]
    sticks[:, 1:trunc] = V[:, 1:] * remaining[:, :-1]
    sticks[:, trunc] = remaining[:, -1]
    cum = np.cumsum(w)
    atoms = np.searchsorted(cum, rng.random((n, trunc + 1)) * cum[-1], side="right")
    atoms = np.minimum(atoms, w.size - 1)
    flat = (np.arange(n)[:, None] * w.size + atoms).reshape(-1)
    out = np.bincount(flat, weights=sticks.reshape(-1), minlength=n * w.size)
    return out.reshape(n, w.size)


def sample_stick_breaking(rho, rng, trunc=200):
    return SimplexPoint(sample_stick_breaking_batch(rho, 1, rng, trunc)[0], FLOAT)


def leftover_mass_bound(rho, trunc):
    """Expected mass left after ``trunc`` sticks, ``(theta/(1+theta))^trunc``."""
    theta = float(sum(_float_weights(rho)))
    return (theta / (1.0 + theta)) ** trunc


def polya_urn_batch(rho, steps, replicates, rng):
    """Compositions ``counts/steps`` of independent Polya urns.

    Each step draws an atom with probability proportional to its weight plus
    the number of earlier draws of it, then records the draw.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    w = _float_weights(rho)
    counts = np.zeros((replicates, w.size))
    rows = np.arange(replicates)
    for _ in range(steps):
        cum = np.cumsum(w + counts, axis=1)
        u = rng.random(replicates) * cum[:, -1]
        pick = (u[:, None] >= cum).sum(axis=1)
        counts[rows, pick] += 1
    return counts / steps


def polya_urn(rho, steps, rng):
    return SimplexPoint(polya_urn_batch(rho, steps, 1, rng)[0], FLOAT)


SAMPLERS = {
    "gamma": lambda rho, n, rng: sample_dirichlet_batch(rho, n, rng),
    "stick": lambda rho, n, rng: sample_stick_breaking_batch(rho, n, rng),
}


def draw(rho, n_samples, seed, sampler="gamma"):
    """``n_samples`` draws from the counter-based stream of ``seed``."""
    make = SAMPLERS[sampler]
    blocks = []
    for b, start in enumerate(range(0, n_samples, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, n_samples - start)
        blocks.append(make(rho, size, block_rng(seed, b)))
    return np.concatenate(blocks) if blocks else np.zeros((0, rho.d))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    sampler: str = "gamma"

    def z_score(self, exact):
        diff = self.mean - float(exact)
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else float("inf") * np.sign(diff)
        return diff / self.std_error

    def report(self, exact):
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "n": self.n_samples,
            "seed": self.seed,
            "exact_ref": float(exact),
            "z_score": self.z_score(exact),
        }

    def as_dict(self):
        return asdict(self)


def _estimate(values, n, seed, sampler):
    base = values[0]
    centred = values - base
    mean = float(base + centred.mean())
    se = float(centred.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean, se, n, int(seed), sampler)


def mc_expect_many(rho, Fs, n_samples, seed, sampler="gamma"):
    """Estimates of ``E F`` for several functionals from one shared set of draws."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rho_f = rho.astype(FLOAT)
    P = draw(rho_f, n_samples, seed, sampler)
    values = poly_eval_many([F.astype(FLOAT) for F in Fs], P)
    return [_estimate(v, n_samples, seed, sampler) for v in values]


def mc_expect(rho, F, n_samples, seed, sampler="gamma"):
    """Sample mean of ``F`` over Dirichlet draws, with its standard error."""
    return mc_expect_many(rho, [F], n_samples, seed, sampler)[0]
