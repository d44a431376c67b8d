"""Monte Carlo estimates from the gamma and stick-breaking samplers against exact expectations."""

import numpy as np

from dfcalc import FiniteMeasure, expect_poly, mc_expect_many
from dfcalc.randgen import random_poly

rho = FiniteMeasure(["1/2", 2, 1])
Fs = [random_poly(np.random.default_rng(k), 3, 3) for k in range(3)]
exact = [expect_poly(rho, F) for F in Fs]

for sampler in ("gamma", "stick"):
    for F_exact, est in zip(exact, mc_expect_many(rho, Fs, 100_000, seed=1, sampler=sampler)):
        print(f"{sampler:5}  exact {float(F_exact):+.6f}  estimate {est.mean:+.6f} +- {est.std_error:.6f}  z = {est.z_score(F_exact):+.2f}")
