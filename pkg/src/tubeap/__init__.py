"""Analytic invariants of almost periodic exponential sums on tube domains
over convex cones: Jessen functions, secular vectors, growth indicators,
zero densities, and value-distribution experiments."""

from .cone import (
    Cone,
    PointSet,
    cone_contains,
    conjugate_cone,
    make_cone,
    spectrum_in_shifted_cone,
    support_function,
    support_linear_on_cone,
)
from .expsum import (
    CoeffEstimate,
    ExpSum,
    TubePoint,
    almost_period_defect,
    evaluate,
    evaluate_grid,
    evaluate_ray,
    find_almost_period,
    fourier_coefficient,
    log_abs,
    restrict_to_ray,
)
from .jessen import (
    ConvexityReport,
    JessenEstimate,
    MeanMotionResult,
    QuadSpec,
    SecularEstimate,
    convexity_check,
    jessen_estimate,
    jessen_profile,
    lemma2_bound,
    mean_motion,
    secular_vector,
)
from .indicator import (
    IndicatorEstimate,
    normalize,
    p_indicator_empirical,
    p_indicator_exact,
    pl_bound_check,
)
from .zeros import (
    Rect,
    RootWitness,
    ZeroCountResult,
    ZeroDensityResult,
    attainment_search,
    count_zeros_rect,
    find_roots_in_rect,
    solve_value,
    tail_zero_search,
    zero_density_strip,
)
from .classify import (
    CaseLabel,
    CaseParams,
    VerificationReport,
    classify_spectrum,
    run_case_experiment,
    secular_convergence,
    theorem1_verify,
    theoremR_check,
)

__version__ = "0.1.0"
