"""Exact and floating-point calculus for the Dirichlet-Ferguson process on a finite space."""

from .chaos import (
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
from .law import (
    PolyFunctional,
    expect_poly,
    expect_power,
    mecke_check,
    palm_shift,
    poly_eval,
    poly_eval_batch,
    poly_eval_many,
    poly_mul,
    poly_power,
    tfn,
)
from .malliavin import (
    CylinderFunction,
    PoincareResult,
    RandomField,
    campbell_inner,
    delta_nabla_check,
    dirichlet_form,
    divergence,
    flemingviot_generator,
    generator_L,
    gradient,
    gradient_pathwise,
    make_divergence_ready,
    mutation,
    poincare_check,
    semigroup,
)
from .measure import (
    FiniteMeasure,
    SetPartition,
    SimplexPoint,
    TensorFn,
    add_diracs_expand,
    bracket_integrate,
    bracket_integrate_symmetric,
    bracket_materialize,
    diracsum,
    moment_partition_formula,
    partitions,
    reindex,
    rising_sum_identity,
    symmetrize,
    tensor_product,
)
from .montecarlo import (
    McEstimate,
    mc_expect,
    mc_expect_many,
    polya_urn,
    sample_dirichlet,
    sample_stick_breaking,
)
from .report import VerificationReport
from .scalar import EXACT, FLOAT, ModeError, rising_factorial
from .suites import battery, calculus_suite, orthogonality_suite

__version__ = "0.1.0"
