"""Minimal weight-norm costs of shallow RePU networks.

Exact univariate costs on piecewise polynomials, numerical Radon-domain
costs in odd dimension, and a small training harness for checking the
regularized-fit equivalence empirically.
"""

from .measures import (
    AtomicMeasure,
    GridMeasure,
    WeightFn,
    even_odd_decompose,
    load_measure,
    measure_from_dict,
    measure_to_dict,
    save_measure,
    sphere_area,
    tv_norm,
    weighted_tv_norm,
)
from .spheres import direction_set, fibonacci_hemisphere, orthonormal_frame
from .spectral import fourier_derivative
from .networks import (
    CostBreakdown,
    MonomialNet,
    RepuNet,
    canonical_cost,
    canonicalize,
    cost,
    eval_net,
    net_from_dict,
    net_to_dict,
    rebalance,
    to_measure,
)
from .infinite import (
    InfiniteNet,
    LaplacianIdentityReport,
    eval_H,
    eval_H_normalized_at_zero,
    laplacian_identity_check,
    laplacian_power_field,
)
from .univariate import (
    CostReport,
    DistributionalDerivative,
    MomentL1Problem,
    PiecewisePoly1D,
    TheoremCheck,
    abs_power,
    build_optimal_measure,
    cost_1d,
    distributional_derivatives,
    monomial,
    repu_power,
    solve_moment_problem,
    verify_theorem_1d,
)
from .radon import (
    IntertwiningReport,
    RadonImage,
    ScalarField,
    SliceCheckReport,
    dual_radon,
    fourier_slice_check,
    gamma_d,
    gaussian_field,
    gaussian_mixture_field,
    intertwining_check,
    invert_radon,
    laplacian_field,
    radon,
)
from .rnorm import (
    RNormReport,
    SeparableTestImage,
    default_dictionary,
    near_optimal_test_function,
    rnorm_both,
    rnorm_direct,
    rnorm_dual_estimate,
    rnorm_of_net,
)
from .fitting import FitConfig, FitDiverged, FitResult, SweepRow, fit, lambda_sweep

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "GridMeasure",
    "WeightFn",
    "even_odd_decompose",
    "load_measure",
    "measure_from_dict",
    "measure_to_dict",
    "save_measure",
    "sphere_area",
    "tv_norm",
    "weighted_tv_norm",
    "direction_set",
    "fibonacci_hemisphere",
    "orthonormal_frame",
    "fourier_derivative",
    "CostBreakdown",
    "MonomialNet",
    "RepuNet",
    "canonical_cost",
    "canonicalize",
    "cost",
    "eval_net",
    "net_from_dict",
    "net_to_dict",
    "rebalance",
    "to_measure",
    "InfiniteNet",
    "LaplacianIdentityReport",
    "eval_H",
    "eval_H_normalized_at_zero",
    "laplacian_identity_check",
    "laplacian_power_field",
    "CostReport",
    "DistributionalDerivative",
    "MomentL1Problem",
    "PiecewisePoly1D",
    "TheoremCheck",
    "abs_power",
    "build_optimal_measure",
    "cost_1d",
    "distributional_derivatives",
    "monomial",
    "repu_power",
    "solve_moment_problem",
    "verify_theorem_1d",
    "IntertwiningReport",
    "RadonImage",
    "ScalarField",
    "SliceCheckReport",
    "dual_radon",
    "fourier_slice_check",
    "gamma_d",
    "gaussian_field",
    "gaussian_mixture_field",
    "intertwining_check",
    "invert_radon",
    "laplacian_field",
    "radon",
    "RNormReport",
    "SeparableTestImage",
    "default_dictionary",
    "near_optimal_test_function",
    "rnorm_both",
    "rnorm_direct",
    "rnorm_dual_estimate",
    "rnorm_of_net",
    "FitConfig",
    "FitDiverged",
    "FitResult",
    "SweepRow",
    "fit",
    "lambda_sweep",
    "__version__",
]
