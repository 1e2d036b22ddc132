"""Quasi-developable ruled B-spline surfaces from control rulings.

A toolkit for fitting ruled surfaces bounded by two clamped B-spline curves
to an ordered sequence of straight control rulings. The first and last
rulings are matched exactly; interior rulings pull softly while a sampled
developability objective drives the warp angle along the rulings toward
zero.
"""

from .errors import (
    DegenerateGeometryError,
    DomainError,
    RuledevError,
    SingularSystemError,
    SolverError,
    ValidationError,
)
from .objective import (
    NormalField,
    OptimizationProblem,
    Weights,
    assemble,
    f_closeness,
    f_dev,
    f_energy,
    f_interior,
    f_width,
    init_normals,
)
from .optimizer import SolverOptions, SolverTrace, minimize
from .pipelines import (
    OuterOptions,
    PipelineResult,
    fit_fixed_boundary,
    fit_relaxed,
    gen_strip,
    initial_interpolation,
    subdivide_rulings,
)
from .splines import (
    Parametrization,
    SplineCurve,
    average_ruling_params,
    centripetal_params,
    evaluate_curve,
    foot_point,
    interpolate,
    line_curve,
)
from .surface import (
    Anchor,
    MetricsReport,
    PlaneChain,
    RuledSurface,
    Ruling,
    RulingSequence,
    compute_metrics,
    eval_surface,
    extend_chain,
    snap_to_plane,
    strip_planarity_defect,
    surface_normal,
    warp_angle,
)

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "DegenerateGeometryError",
    "DomainError",
    "MetricsReport",
    "NormalField",
    "OptimizationProblem",
    "OuterOptions",
    "Parametrization",
    "PipelineResult",
    "PlaneChain",
    "RuledSurface",
    "RuledevError",
    "Ruling",
    "RulingSequence",
    "SingularSystemError",
    "SolverError",
    "SolverOptions",
    "SolverTrace",
    "SplineCurve",
    "ValidationError",
    "Weights",
    "assemble",
    "average_ruling_params",
    "centripetal_params",
    "compute_metrics",
    "eval_surface",
    "evaluate_curve",
    "extend_chain",
    "f_closeness",
    "f_dev",
    "f_energy",
    "f_interior",
    "f_width",
    "fit_fixed_boundary",
    "fit_relaxed",
    "foot_point",
    "gen_strip",
    "init_normals",
    "initial_interpolation",
    "interpolate",
    "line_curve",
    "minimize",
    "snap_to_plane",
    "strip_planarity_defect",
    "subdivide_rulings",
    "surface_normal",
    "warp_angle",
]
