"""Accelerated first-order optimization of geodesically convex functions on
constant-curvature manifolds, via geodesic-map reduction to a constrained
Euclidean problem."""

from .manifolds import (
    HYPERBOLIC,
    SPHERICAL,
    AmbientPoint,
    CurvatureClass,
    GeometryError,
    RescaledProblem,
    TangentVector,
    distance,
    exp_map,
    grad_half_sqdist,
    log_map,
    pole,
    rescale_to_unit,
)
from .geomap import (
    DeformationConstants,
    MapFrame,
    angle_deformation,
    deformation_constants,
    from_ball,
    from_ball_point,
    make_frame,
    mapped_distance,
    pullback_gradient,
    pushforward_vec,
    to_ball,
)
from .objectives import (
    DeltaConstants,
    FrechetObjective,
    ManifoldObjective,
    MappedObjective,
    delta_constants,
    grad_mapped,
    load_anchors,
    regularized,
    save_anchors,
    validate_constants,
    value_mapped,
    with_constants,
)
from .axgd import (
    LineSearchError,
    SolverParams,
    SolverState,
    axgd_step,
    binary_line_search,
    iteration_budget,
    mirror_dual_grad,
    params_from_constants,
    run,
)
from .reductions import (
    RegularizationPlan,
    RestartPlan,
    make_regularization_plan,
    make_restart_plan,
    solve_gconvex_via_sc,
    solve_strongly_gconvex,
)
from .baselines import RgdParams, reference_optimum, rgd_run
from .bench import ExperimentConfig, fit_rate_exponent, run_experiment, run_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
