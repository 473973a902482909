"""Convex envelopes of boundary data via tug-of-war on random geometric graphs."""

from .errors import (
    ConfigError,
    DegenerateExperimentError,
    EnvelopeError,
    InfeasibleOracleError,
    InvalidDimensionError,
    InvalidParameterError,
    MissingAnnulusError,
    NonConvergenceError,
    NonTerminationError,
    OutOfDomainError,
    ScheduleUndefinedError,
)
from .geometry import DomainSpec, GraphParams, PointCloud, sample_points, schedule_params
from .rgg import (
    AnnulusSystem,
    CoverageReport,
    ProximityGraph,
    ReflectionErrors,
    VertexClassification,
    annulus_neighbors,
    build_graph,
    classify,
    classify_vertices,
    coverage_report,
    direction_net,
    largest_component,
    reflect,
    reflection_errors,
    sector_volume,
)
from .solver import (
    ValueField,
    check_subsolution,
    check_supersolution,
    datum_values,
    dpp_sweep,
    greedy_moves,
    greedy_policy,
    solve_dpp,
)
from .game import (
    Episode,
    McEstimate,
    default_step_cap,
    episode_seed_for,
    greedy_strategy,
    monte_carlo_value,
    simulate_episode,
)
from .analysis import (
    BarrierReport,
    ConsistencyReport,
    EnvelopeCase,
    ErrorStats,
    SmoothTestFunction,
    ValueExtender,
    affine_case,
    analytic_envelope,
    barrier_residual,
    barrier_slope,
    barrier_values,
    brute_envelope_oracle,
    consistency_report,
    constant_case,
    discrete_operator,
    extend_values,
    half_square_norm,
    lambda_min,
    make_eval_grid,
    quadratic_test_function,
    saddle_case,
    sup_error,
    verify_gradient,
)
from .streams import coin, derive_seed, derive_seeds, uniform01

__version__ = "0.1.0"

__all__ = [
    "AnnulusSystem",
    "BarrierReport",
    "ConfigError",
    "ConsistencyReport",
    "CoverageReport",
    "DegenerateExperimentError",
    "DomainSpec",
    "EnvelopeCase",
    "EnvelopeError",
    "Episode",
    "ErrorStats",
    "GraphParams",
    "InfeasibleOracleError",
    "InvalidDimensionError",
    "InvalidParameterError",
    "McEstimate",
    "MissingAnnulusError",
    "NonConvergenceError",
    "NonTerminationError",
    "OutOfDomainError",
    "PointCloud",
    "ProximityGraph",
    "ReflectionErrors",
    "ScheduleUndefinedError",
    "SmoothTestFunction",
    "ValueExtender",
    "ValueField",
    "VertexClassification",
    "affine_case",
    "analytic_envelope",
    "annulus_neighbors",
    "barrier_residual",
    "barrier_slope",
    "barrier_values",
    "brute_envelope_oracle",
    "build_graph",
    "check_subsolution",
    "check_supersolution",
    "classify",
    "classify_vertices",
    "coin",
    "consistency_report",
    "constant_case",
    "coverage_report",
    "datum_values",
    "default_step_cap",
    "derive_seed",
    "derive_seeds",
    "direction_net",
    "discrete_operator",
    "dpp_sweep",
    "episode_seed_for",
    "extend_values",
    "greedy_moves",
    "greedy_policy",
    "greedy_strategy",
    "half_square_norm",
    "lambda_min",
    "largest_component",
    "make_eval_grid",
    "monte_carlo_value",
    "quadratic_test_function",
    "reflect",
    "reflection_errors",
    "saddle_case",
    "sample_points",
    "schedule_params",
    "sector_volume",
    "simulate_episode",
    "solve_dpp",
    "sup_error",
    "uniform01",
    "verify_gradient",
]
