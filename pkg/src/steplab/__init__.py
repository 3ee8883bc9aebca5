"""Desk-scale laboratory for step-size behaviour of first-order iterations."""

from .operators import (
    GridSpec,
    LinearOperator,
    QuadraticObjective,
    SpectrumHint,
    laplacian_2d,
    solve_reference,
    stability_bound,
)
from .descent import (
    AlternatingSDStep,
    ConstantStep,
    IterationTrace,
    LaggedSteepestDescentStep,
    RunConfig,
    SteepestDescentStep,
    conjugate_gradient,
    gradient_descent,
    monotonize,
    nesterov,
    sd_step,
)
from .filters import (
    EulerFilterResult,
    ExponentialFilter,
    SvdSystem,
    TikhonovFilter,
    TruncatedFilter,
    euler_filter_realization,
    filter_value,
    filtered_solve,
)
from .midpoint import (
    MidpointProblem,
    MidpointTrajectory,
    ghost_rhs,
    instability_search,
    integrate_midpoint,
    midpoint_step,
    rotating_jordan_family,
    verify_ghost_identity,
)

__version__ = "0.1.0"
