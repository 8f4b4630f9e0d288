"""Safe regions in dual space and the tests that eliminate variables.

A sphere (center, radius) certified to contain the dual optimum lets us
discard column j whenever ||x_j^T c|| + r ||x_j|| < 1: the optimal
coefficient row is then provably zero.  The dynamic sphere is centered
on the current feasible dual point with radius sqrt(2 gap / (gamma
lambda^2)); it shrinks to a point as the solver converges.

The ``edpp_*`` functions implement the sequential dual-polytope
projection family for q = 1: the original rule (exact only when fed the
exact previous dual optimum, hence unsafe in practice), and the two
inflated-radius corrections that stay safe under an approximate
previous dual point certified to radius r_prev.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .models import dual_linf_l2_norm, dual_value, gradient_map, lambda_max, loss_value

__all__ = [
    "SafeSphere",
    "ActiveSet",
    "ScreeningEvent",
    "DegenerateDirectionError",
    "gap_radius",
    "dual_point_from_residual",
    "sphere_test",
    "screen_with_sphere",
    "static_sphere",
    "equicorrelation_set",
    "edpp_projection_coef",
    "edpp_unsafe_sphere",
    "edpp_safe_sphere",
    "edpp_safe_plus_sphere",
]


class DegenerateDirectionError(ZeroDivisionError):
    """Raised when the sequential rule's reference direction has norm zero.

    This happens exactly when the supplied dual point equals y/lambda_prev,
    e.g. after accepting B = 0 as an approximate solution.  Callers fall
    back to the gap sphere (safe rules) or record a failure (unsafe
    reproduction).
    """


@dataclass
class SafeSphere:
    """Dual-space ball (center, radius) certified to contain the dual optimum."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim == 1:
            c = c[:, None]
        if not np.all(np.isfinite(c)) or not np.isfinite(self.radius):
            raise ValueError("sphere center and radius must be finite")
        if self.radius < 0:
            raise ValueError("sphere radius must be nonnegative")
        self.center = c


@dataclass
class ActiveSet:
    """Boolean mask over columns; entries turn off permanently within a solve."""

    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def n_active(self):
        return int(self.mask.sum())

    def indices(self):
        return np.flatnonzero(self.mask)

    def copy(self):
        return ActiveSet(self.mask.copy())


@dataclass
class ScreeningEvent:
    """One checkpoint record: duality gap, sphere radius, screening counts."""

    epoch: int
    gap: float
    radius: float
    n_screened_new: int
    n_active_after: int


def gap_radius(gap, gamma, lam):
    """Safe-sphere radius from a duality gap: sqrt(2 gap / (gamma lam^2)).

    Tiny negative gaps from roundoff are clamped to zero (weak duality
    guarantees nonnegativity analytically).
    """
    return math.sqrt(2.0 * max(gap, 0.0) / (gamma * lam * lam))


def dual_point_from_residual(R, lam, X):
    """Feasible dual point from the negative-gradient residual R = -G(XB).

    Returns (Theta, omega) where omega = max_j ||x_j^T R|| over *all*
    columns; Theta = R / max(lam, omega) always satisfies the dual norm
    constraint, and for entropic models also stays in the dual domain
    (it is a convex combination of 0 and R/lam).
    """
    R = np.asarray(R)
    omega = dual_linf_l2_norm(X, R)
    return R / max(lam, omega), omega


def sphere_test(X, sphere, j):
    """True when column j is provably inactive for every dual point in the sphere."""
    corr = np.linalg.norm(X.col_dot_mat(j, sphere.center))
    # strict inequality, no epsilon slack: slack would risk unsafety
    return bool(corr + sphere.radius * X.col_norm(j) < 1.0)


def screen_with_sphere(X, sphere, active, eligible=None):
    """Turn off every currently-active column that passes the sphere test.

    Returns (active, n_screened_new); previously inactive entries are
    left untouched.  With ``eligible`` (boolean mask) only those columns
    are candidates.
    """
    cand = active.mask if eligible is None else active.mask & eligible
    idx = np.flatnonzero(cand)
    if idx.size == 0:
        return active, 0
    C = X.t_matmul(sphere.center)
    corr = np.sqrt(np.einsum("jk,jk->j", C, C))
    reach = corr + sphere.radius * X.col_norms
    screened = idx[reach[idx] < 1.0]
    active.mask[screened] = False
    return active, int(screened.size)


def static_sphere(model, X, lam):
    """The one-shot sphere available before any iterations.

    Center -G(0)/lambda_max is always feasible; the radius is the gap
    radius evaluated once at B = 0 and never shrinks afterwards.
    """
    lmax = lambda_max(model, X)
    if lmax <= 0:
        raise ValueError("lambda_max is zero; trivial problem")
    G0 = gradient_map(model, np.zeros((X.n, model.q)))
    center = -G0 / lmax
    p0 = loss_value(model, np.zeros((X.n, model.q)))
    gap0 = p0 - dual_value(model, center, lam)
    return SafeSphere(center, gap_radius(gap0, model.gamma, lam))


def equicorrelation_set(X, Theta_ref, tol):
    """Columns whose correlation with the reference dual point is within tol of 1."""
    Theta_ref = np.asarray(Theta_ref)
    if Theta_ref.ndim == 1:
        Theta_ref = Theta_ref[:, None]
    C = X.t_matmul(Theta_ref)
    corr = np.sqrt(np.einsum("jk,jk->j", C, C))
    return np.flatnonzero(corr >= 1.0 - tol)


def _as_vector(v, name):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 2 and v.shape[1] == 1:
        v = v[:, 0]
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector (q = 1)")
    return v


def edpp_projection_coef(theta, y, lam_prev, lam_next):
    """Nonnegative least-squares coefficient of y/lam_prev - theta in y/lam_next - theta.

    Raises DegenerateDirectionError when the reference direction
    y/lam_prev - theta vanishes; the error is catchable by design.
    """
    theta = _as_vector(theta, "theta")
    y = _as_vector(y, "y")
    v1 = y / lam_prev - theta
    denom = float(v1 @ v1)
    if denom == 0.0:
        raise DegenerateDirectionError(
            "dual point coincides with y/lambda_prev; projection coefficient undefined"
        )
    v2 = y / lam_next - theta
    return max(0.0, float(v1 @ v2) / denom)


def _vperp(theta, y, lam_prev, lam_next, alpha):
    return y / lam_next - theta - alpha * (y / lam_prev - theta)


def edpp_unsafe_sphere(theta_prev, y, lam_prev, lam_next):
    """Sequential sphere built as if theta_prev were the exact dual optimum.

    Only safe when it is; with an approximate theta_prev active variables
    may be wrongly discarded.  Kept for the reproduction harness.
    """
    theta_prev = _as_vector(theta_prev, "theta_prev")
    y = _as_vector(y, "y")
    alpha = edpp_projection_coef(theta_prev, y, lam_prev, lam_next)
    vp = _vperp(theta_prev, y, lam_prev, lam_next, alpha)
    return SafeSphere(theta_prev + 0.5 * vp, 0.5 * float(np.linalg.norm(vp)))


def edpp_safe_sphere(theta, r_prev, y, lam_prev, lam_next):
    """Safe sequential sphere centered on an approximate dual point.

    ``r_prev`` must certify that the previous dual optimum lies within
    r_prev of theta (e.g. a gap radius at lam_prev).  The radius inflates
    by r_prev (1 + |1 - alpha|) on top of the projection residual, which
    recovers the exact-center ball when r_prev = 0.
    """
    theta = _as_vector(theta, "theta")
    y = _as_vector(y, "y")
    alpha = edpp_projection_coef(theta, y, lam_prev, lam_next)
    vp = _vperp(theta, y, lam_prev, lam_next, alpha)
    radius = r_prev * (1.0 + abs(1.0 - alpha)) + float(np.linalg.norm(vp))
    return SafeSphere(theta.copy(), radius)


def edpp_safe_plus_sphere(theta, r_prev, y, lam_prev, lam_next):
    """Safe version of the projected-center sequential sphere.

    Center theta + v_perp/2; the radius adds to the exact-center terms a
    correction proportional to r_prev and to the grid step
    ||y/lam_next - y/lam_prev||.  Reduces to the exact rule at r_prev = 0.
    """
    theta = _as_vector(theta, "theta")
    y = _as_vector(y, "y")
    alpha = edpp_projection_coef(theta, y, lam_prev, lam_next)
    vp = _vperp(theta, y, lam_prev, lam_next, alpha)
    v1_norm = float(np.linalg.norm(y / lam_prev - theta))
    step = float(np.linalg.norm(y / lam_next - y / lam_prev))
    radius = (
        0.5 * (abs(1.0 - alpha) + 1.0 + alpha) * r_prev
        + 0.5 * float(np.linalg.norm(vp))
        + step * r_prev / (2.0 * v1_norm * v1_norm) * (3.0 * v1_norm + 2.0 * r_prev)
    )
    return SafeSphere(theta + 0.5 * vp, radius)
