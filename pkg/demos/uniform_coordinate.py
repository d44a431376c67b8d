"""Two atoms of weight one: the first coordinate of the random measure is uniform.

Walks through moments, the chaos decomposition, the gradient and the
Poincare inequality for F(mu) = mu({0}), all in exact arithmetic.
"""

from dfcalc import (
    FiniteMeasure,
    PolyFunctional,
    TensorFn,
    expect_power,
    gradient,
    kernels_general,
    poincare_check,
    variance,
)

rho = FiniteMeasure([1, 1])
one = TensorFn.indicator((0,), 2)

print("E zeta_0     =", expect_power(rho, one))
print("E zeta_0^2   =", expect_power(rho, TensorFn.indicator((0, 0), 2)))

F = PolyFunctional.monomial(one)
ce = kernels_general(rho, F)
print("f0           =", ce.f0)
print("f1           =", [str(v) for v in ce.kernels[1].values])
print("Var F        =", variance(rho, ce))

grad = gradient(rho, ce)
for x in range(2):
    print(f"grad F at mu=(1/4, 3/4), x={x}:", grad.evaluate(["1/4", "3/4"], x))

res = poincare_check(rho, ce)
print("Poincare: variance", res.variance, "energy/theta", res.energy_over_theta, "equality", res.equality)
