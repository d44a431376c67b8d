"""A second-chaos functional: strict Poincare inequality and semigroup decay."""

import numpy as np

from dfcalc import FiniteMeasure, PolyFunctional, kernels_general, poincare_check, semigroup, variance
from dfcalc.randgen import random_hn

rho = FiniteMeasure(["1/2", 1, "3/2"])
h = random_hn(np.random.default_rng(0), rho, 2)
ce = kernels_general(rho, PolyFunctional.monomial(h))
print("nonzero chaos orders:", ce.nonzero_orders())

res = poincare_check(rho, ce)
print(f"Var F = {res.variance}  <  energy/theta = {res.energy_over_theta}")

rho_f = rho.astype("float")
v0 = float(variance(rho, ce))
for t in (0.0, 0.1, 0.5, 1.0):
    vt = variance(rho_f, semigroup(rho, ce, t))
    # the second-chaos kernel decays like exp(-2 (theta + 1) t); the variance decays twice as fast
    predicted = v0 * np.exp(-4 * (float(rho.theta) + 1) * t)
    print(f"t={t:<4} Var T_t F = {vt:.6f}   predicted {predicted:.6f}")
