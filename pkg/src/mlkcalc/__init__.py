"""Atangana-Baleanu fractional calculus with Mittag-Leffler kernels."""

from .ab_ops import (
    ABParams,
    CancellationWarning,
    ConstantNorm,
    MLResummed,
    ExponentialNorm,
    NormalizationWarning,
    ab_integral,
    abc_derivative,
    abc_derivative_kernel,
    abc_derivative_ml,
    abc_derivative_series,
    abr_derivative,
    abr_derivative_kernel,
    abr_derivative_ml,
    abr_derivative_series,
    verify_inverse_identities,
)
from .errors import (
    BranchAmbiguity,
    ComplexRoot,
    DegenerateK,
    DenominatorZero,
    DiscriminantZero,
    DomainError,
    MLKCalcError,
    NoConvergence,
    NumericalError,
    OscillationError,
    PoleError,
    ValidationError,
)
from .funcmodel import Grid, PowerSum, SampledFn, SmoothFn, parse_function, sample
from .laplace_ode import (
    InitialValueWarning,
    LinearODESpec,
    NonlinearConvSpec,
    TransferFn,
    abc_transfer,
    abr_transfer,
    laplace_of,
    linear_residual,
    nonlinear_residual,
    rl_transfer,
    solve_linear,
    solve_nonlinear_conv,
    solve_sequential,
    talbot_invert,
)
from .plot import emit_plot
from .policy import TruncationPolicy
from .riccati import RiccatiSpec, riccati_coefficients, riccati_eval, riccati_residual
from .rl_ops import caputo_derivative, rl_derivative, rl_integral
from .rules import RuleTruncation, chain_rule, chain_rule_coefficients, enumerate_partitions, product_rule
from .semigroup import (
    IndicialPoly,
    SemigroupCase,
    fde_residual,
    fie_residual,
    indicial_poly,
    semigroup_defect,
    semigroup_sides,
    semigroup_solution,
)
from .specialfn import gamma, miller_ross, mittag_leffler, ml_series, recip_gamma

__version__ = "0.1.0"
