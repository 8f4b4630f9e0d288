"""Regularization-path driver: grids, warm starts, sequential spheres.

Paths run down a geometric grid from lambda_max, warm-starting each
point from the previous solution.  Sequential rules carry information
across points:

* ``edpp-seeded``  seeds each solve (q = 1, from the third point on)
  with the safe projected sequential sphere built from the previous
  dual point and its certified gap radius, then lets the dynamic gap
  rule take over.  On the degenerate-direction error it falls back to
  no seed, i.e. the plain dynamic rule.
* ``edpp-unsafe``  reproduces the uncorrected sequential rule fed an
  approximate previous dual point; failures (division by zero, or a
  final solution whose full-problem gap exceeds tolerance) are recorded
  per point, never raised.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .models import ProblemInstance, dual_linf_l2_norm, dual_value, gradient_map, lambda_max, primal_value
from .screening import DegenerateDirectionError, edpp_safe_plus_sphere, edpp_unsafe_sphere, gap_radius
from .solver import (
    RULE_EDPP_SEEDED,
    RULE_EDPP_UNSAFE,
    RULE_GAP,
    SolverConfig,
    solve,
)

__all__ = [
    "PathConfig",
    "PathPoint",
    "PathResult",
    "SweepResult",
    "lambda_grid",
    "solve_path",
    "active_fraction_sweep",
]


@dataclass
class PathConfig:
    n_points: int = 100
    delta: float = 3.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    unsafe_variant: str = "a"
    budgets: tuple = ()
    warm_sweep: bool = True

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("a path needs at least 2 grid points")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.unsafe_variant not in ("a", "b"):
            raise ValueError("unsafe_variant must be 'a' or 'b'")


@dataclass
class PathPoint:
    lam: float
    gap: float
    cert_gap: float
    epochs: int
    wall_s: float
    n_active: int
    converged: bool
    failure: str = ""
    true_gap: float = float("nan")


@dataclass
class PathResult:
    lambdas: np.ndarray
    points: list
    results: list
    total_wall_s: float


@dataclass
class SweepResult:
    lambdas: np.ndarray
    budgets: tuple
    fractions: np.ndarray  # shape (n_points, n_budgets)


def lambda_grid(lam_max, delta, n_points):
    """Geometric grid from lam_max down to lam_max * 10**(-delta)."""
    if n_points < 2:
        raise ValueError("a grid needs at least 2 points")
    if lam_max <= 0:
        raise ValueError("lambda_max must be positive")
    t = np.arange(n_points)
    return lam_max * 10.0 ** (-delta * t / (n_points - 1))


def _unsafe_prev_dual(X, y, B_prev, lam_prev, variant):
    """The two documented approximations of the previous dual optimum."""
    r = y - X.matmul(B_prev)[:, 0]
    if variant == "a":
        return r / lam_prev
    return r / max(lam_prev, dual_linf_l2_norm(X, r[:, None]))


def _full_gap(prob, B):
    """Gap with all columns restored, at the full-column-feasible dual point."""
    Z = prob.X.matmul(B)
    R = -gradient_map(prob.model, Z)
    omega = dual_linf_l2_norm(prob.X, R)
    Theta = R / max(prob.lam, omega)
    return max(primal_value(prob, B, Z) - dual_value(prob.model, Theta, prob.lam), 0.0)


def solve_path(X, model, config):
    """Solve the full path; never raises on a bad point, records it instead."""
    lmax = lambda_max(model, X)
    if lmax <= 0:
        raise ValueError("lambda_max is zero; no meaningful path exists")
    lambdas = lambda_grid(lmax, config.delta, config.n_points)
    rule = config.solver.rule
    y = model.Y[:, 0] if model.q == 1 else None

    points = []
    results = []
    B_prev = None
    prev = None
    t_start = time.perf_counter()
    for t, lam in enumerate(lambdas):
        seed = None
        failure = ""
        cfg = config.solver
        if rule == RULE_EDPP_SEEDED:
            # the sequential sphere needs lam_prev < lambda_max and q = 1;
            # otherwise the warm-started first gap evaluation seeds screening
            cfg = replace(cfg, rule=RULE_GAP)
            if model.q == 1 and t >= 2:
                r_prev = gap_radius(prev.cert_gap, model.gamma, lambdas[t - 1])
                try:
                    seed = edpp_safe_plus_sphere(
                        prev.Theta[:, 0], r_prev, y, lambdas[t - 1], lam
                    )
                except DegenerateDirectionError:
                    seed = None
        elif rule == RULE_EDPP_UNSAFE:
            if model.q != 1:
                raise ValueError("the sequential reproduction rule requires q = 1")
            if t >= 2:
                theta_prev = _unsafe_prev_dual(X, y, B_prev, lambdas[t - 1], config.unsafe_variant)
                try:
                    seed = edpp_unsafe_sphere(theta_prev, y, lambdas[t - 1], lam)
                except DegenerateDirectionError:
                    failure = "alpha-division-by-zero"
                    seed = None

        prob = ProblemInstance(X, model, float(lam))
        t0 = time.perf_counter()
        res = solve(prob, cfg, warm=B_prev, seed_sphere=seed)
        wall = time.perf_counter() - t0

        true_gap = float("nan")
        if rule == RULE_EDPP_UNSAFE:
            true_gap = _full_gap(prob, res.B)
            if true_gap > config.solver.gap_tolerance and not failure:
                failure = "true-gap-exceeds-tolerance"

        points.append(
            PathPoint(
                lam=float(lam),
                gap=res.gap,
                cert_gap=res.cert_gap,
                epochs=res.epochs_run,
                wall_s=wall,
                n_active=res.active.n_active,
                converged=res.converged,
                failure=failure,
                true_gap=true_gap,
            )
        )
        results.append(res)
        B_prev = res.B
        prev = res
    return PathResult(lambdas, points, results, time.perf_counter() - t_start)


def active_fraction_sweep(X, model, config):
    """Active fraction per (lambda, epoch budget), dynamic rule throughout.

    Each budget K gets its own pass down the grid with max_epochs = K;
    with ``warm_sweep`` the pass warm-starts along the grid.  The
    tolerance floor only stops points that are converged far beyond
    screening saturation.
    """
    if not config.budgets:
        raise ValueError("config.budgets must be a nonempty sequence")
    lmax = lambda_max(model, X)
    if lmax <= 0:
        raise ValueError("lambda_max is zero; no meaningful sweep exists")
    lambdas = lambda_grid(lmax, config.delta, config.n_points)
    fractions = np.zeros((config.n_points, len(config.budgets)))
    for ki, budget in enumerate(config.budgets):
        cfg = replace(config.solver, rule=RULE_GAP, max_epochs=int(budget), gap_tolerance=1e-15)
        B_prev = None
        for t, lam in enumerate(lambdas):
            prob = ProblemInstance(X, model, float(lam))
            res = solve(prob, cfg, warm=B_prev if config.warm_sweep else None)
            fractions[t, ki] = res.active.n_active / X.p
            if config.warm_sweep:
                B_prev = res.B
    return SweepResult(lambdas, tuple(config.budgets), fractions)
