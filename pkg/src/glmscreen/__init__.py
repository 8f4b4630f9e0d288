"""Coordinate-descent solvers for l1/l1-l2 regularized GLMs whose active
sets are pruned by provably safe screening spheres built from duality
gaps."""

from . import _backend
from .linalg import DesignMatrix
from .models import (
    ModelSpec,
    ProblemInstance,
    conjugate_value,
    dual_linf_l2_norm,
    dual_value,
    duality_gap,
    gradient_map,
    lambda_max,
    loss_value,
    primal_value,
)
from .path import (
    PathConfig,
    PathResult,
    active_fraction_sweep,
    lambda_grid,
    solve_path,
)
from .screening import (
    ActiveSet,
    DegenerateDirectionError,
    SafeSphere,
    ScreeningEvent,
    dual_point_from_residual,
    edpp_projection_coef,
    edpp_safe_plus_sphere,
    edpp_safe_sphere,
    edpp_unsafe_sphere,
    equicorrelation_set,
    gap_radius,
    screen_with_sphere,
    sphere_test,
    static_sphere,
)
from .solver import (
    RULE_EDPP_SEEDED,
    RULE_EDPP_UNSAFE,
    RULE_GAP,
    RULE_NONE,
    RULE_STATIC,
    SolveResult,
    SolverConfig,
    block_update_prox,
    block_update_quadratic,
    group_soft_threshold,
    solve,
)

__version__ = "0.1.0"


def backend_name():
    """Which epoch-kernel backend is active: 'compiled' or 'python'."""
    return _backend.active_name()
