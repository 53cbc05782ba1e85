"""Distortion-perception tradeoff curves for finite-alphabet channels.

Compute the minimal expected distortion achievable at every perception
level (transport distance between source and reconstruction marginals),
as an exact piecewise-linear curve with optimal estimators: by linear
programming, by dual vertex enumeration, or in closed form for binary
sources.
"""

from .binary import (
    BinaryAnalysis,
    StepCdf,
    analyze,
    breakpoint_estimators,
    closed_form_curve,
    estimator_at,
    reduced_dual_objective,
    reduced_dual_optimum,
    zero_perception_estimator,
)
from .curve import (
    CurveReport,
    DualVertex,
    PiecewiseLinearCurve,
    ProjectedPoint,
    assemble_curve,
    breakpoint_candidates,
    curve_by_sweep,
    curve_by_vertices,
    estimator_on_curve,
    hull_extremes,
    project_vertex,
)
from .errors import (
    BudgetExceededError,
    CyclingError,
    IterationLimitError,
    ProblemError,
    SolverError,
)
from .lp import HPolyhedron, LPSolution, StandardLP, dual_check, enumerate_vertices, solve
from .model import (
    Coupling,
    DistortionMatrix,
    Distribution,
    Estimator,
    GroundMetric,
    JointChannel,
    Problem,
    Tolerances,
    conditional_cost,
    cost_matrix,
    expected_distortion,
    make_problem,
    minimum_distortion,
    output_distribution,
    posterior_sampling,
    tv_distance,
    validate_problem,
    wasserstein1,
)
from .programs import (
    DualSolution,
    OtFormLayout,
    SolveReport,
    TvFormLayout,
    build_ot_form,
    build_tv_form,
    dual_polyhedron,
    sign_patterns,
    solve_dp_at,
)
from .verify import VerifyReport, cross_verify, grid_oracle

__version__ = "0.1.0"

__all__ = [
    "BinaryAnalysis",
    "BudgetExceededError",
    "Coupling",
    "CurveReport",
    "CyclingError",
    "DistortionMatrix",
    "Distribution",
    "DualSolution",
    "DualVertex",
    "Estimator",
    "GroundMetric",
    "HPolyhedron",
    "IterationLimitError",
    "JointChannel",
    "LPSolution",
    "OtFormLayout",
    "PiecewiseLinearCurve",
    "Problem",
    "ProblemError",
    "ProjectedPoint",
    "SolveReport",
    "SolverError",
    "StandardLP",
    "Tolerances",
    "TvFormLayout",
    "VerifyReport",
    "analyze",
    "assemble_curve",
    "breakpoint_candidates",
    "breakpoint_estimators",
    "build_ot_form",
    "build_tv_form",
    "closed_form_curve",
    "conditional_cost",
    "cost_matrix",
    "cross_verify",
    "curve_by_sweep",
    "curve_by_vertices",
    "dual_check",
    "dual_polyhedron",
    "enumerate_vertices",
    "estimator_at",
    "estimator_on_curve",
    "expected_distortion",
    "grid_oracle",
    "hull_extremes",
    "make_problem",
    "minimum_distortion",
    "output_distribution",
    "posterior_sampling",
    "project_vertex",
    "reduced_dual_objective",
    "reduced_dual_optimum",
    "sign_patterns",
    "solve",
    "solve_dp_at",
    "tv_distance",
    "validate_problem",
    "wasserstein1",
    "zero_perception_estimator",
]
