"""Numerical laboratory for quantitative convex-geometry inequalities.

Exact polytope geometry (hulls, volumes, Minkowski sums, inscribed and
enclosing balls, John-type ellipsoid normalization), stability functionals
(anisotropic perimeter, relative asymmetry, Brunn-Minkowski deficit),
stable arithmetic-geometric mean inequalities, discrete transport
diagnostics, and end-to-end verifiers with explicit constants.
"""
from .bodies import (
    AffineMap,
    Ball,
    ConvexBody,
    VolumeEstimate,
    apply_affine,
    box,
    convex_hull,
    load_body,
    minimal_vertices,
    minkowski_sum,
    random_body,
    regular_polygon,
    sample_interior,
    save_body,
    standard_simplex,
    support,
    volume,
)
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    EllipsoidNotConverged,
    MalformedBodyFile,
    MethodUnavailable,
    NegativeEntry,
    NotCentrallySymmetric,
    NotTwoDimensional,
    OutOfRangeEntry,
    OutOfRegime,
    SampleBudgetExceeded,
    SingularMatrix,
    WulffLabError,
    ZeroDirection,
)
from .functionals import (
    BodyPairMetrics,
    OverlapResult,
    RoundnessEstimate,
    anisotropic_perimeter,
    bm_quantities,
    dar_overlap,
    facet_measures,
    intersection_volume,
    inverse_roundness,
    isoperimetric_deficit,
    maximize_overlap,
    relative_asymmetry,
)
from .lab import (
    BoxRow,
    ExperimentTable,
    InequalityReport,
    REPORT_NAMES,
    box_asymmetry,
    box_beta,
    box_c_lower,
    box_conjecture_experiment,
    box_limit_exact,
    box_pair,
    box_sigma,
    derive_bm_from_iso,
    experiment_table_to_csv,
    random_pair_corpus,
    verify_bm,
    verify_bm_classic,
    verify_dar,
    verify_isoperimetric,
    verify_wulff,
    worst_case_search,
)
from .means import (
    EqualityCase,
    LimitReport,
    MeanDefect,
    SuiteResult,
    amgm_suite,
    bm_to_amgm_limit,
    classify_equality,
    geometric_mean,
    sqrt_fraction_gm_check,
    sqrt_fraction_suite,
    stable_amgm,
)
from .rng import RngSeed
from .transport import (
    TRACE_CONSTANT,
    ChainLine,
    ChainReport,
    ChainSample,
    ChainSuiteResult,
    DiscreteMap,
    GradientBoundReport,
    JacobianDiagnostics,
    LocalJacobian,
    TraceResult,
    assignment_map,
    asymmetry_gradient_bound_check,
    chain_evaluate,
    chain_suite,
    cycle_violations,
    discrete_brenier,
    fan_triangulation,
    global_affine_fit,
    local_jacobians,
    swap_violations,
    trace_inequality_check,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "Ball",
    "BodyPairMetrics",
    "BoxRow",
    "ChainLine",
    "ChainReport",
    "ChainSample",
    "ChainSuiteResult",
    "ConvexBody",
    "DegenerateInput",
    "DimensionMismatch",
    "DiscreteMap",
    "EllipsoidNotConverged",
    "EqualityCase",
    "ExperimentTable",
    "GradientBoundReport",
    "InequalityReport",
    "JacobianDiagnostics",
    "LimitReport",
    "LocalJacobian",
    "MalformedBodyFile",
    "MeanDefect",
    "MethodUnavailable",
    "NegativeEntry",
    "NotCentrallySymmetric",
    "NotTwoDimensional",
    "OutOfRangeEntry",
    "OutOfRegime",
    "OverlapResult",
    "REPORT_NAMES",
    "RngSeed",
    "RoundnessEstimate",
    "SampleBudgetExceeded",
    "SingularMatrix",
    "SuiteResult",
    "TRACE_CONSTANT",
    "TraceResult",
    "VolumeEstimate",
    "WulffLabError",
    "ZeroDirection",
    "amgm_suite",
    "anisotropic_perimeter",
    "apply_affine",
    "assignment_map",
    "asymmetry_gradient_bound_check",
    "bm_quantities",
    "bm_to_amgm_limit",
    "box",
    "box_asymmetry",
    "box_beta",
    "box_c_lower",
    "box_conjecture_experiment",
    "box_limit_exact",
    "box_pair",
    "box_sigma",
    "chain_evaluate",
    "chain_suite",
    "classify_equality",
    "convex_hull",
    "cycle_violations",
    "dar_overlap",
    "derive_bm_from_iso",
    "discrete_brenier",
    "experiment_table_to_csv",
    "facet_measures",
    "fan_triangulation",
    "geometric_mean",
    "global_affine_fit",
    "intersection_volume",
    "inverse_roundness",
    "isoperimetric_deficit",
    "load_body",
    "local_jacobians",
    "maximize_overlap",
    "minimal_vertices",
    "minkowski_sum",
    "random_body",
    "random_pair_corpus",
    "regular_polygon",
    "relative_asymmetry",
    "sample_interior",
    "save_body",
    "sqrt_fraction_gm_check",
    "sqrt_fraction_suite",
    "stable_amgm",
    "standard_simplex",
    "support",
    "swap_violations",
    "trace_inequality_check",
    "verify_bm",
    "verify_bm_classic",
    "verify_dar",
    "verify_isoperimetric",
    "verify_wulff",
    "volume",
    "worst_case_search",
]
