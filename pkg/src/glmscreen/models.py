"""The four problem instances: losses, conjugates, gradients, duality.

Models are identified by a string kind:

* ``lasso``        least squares, scalar target (q = 1)
* ``mtl``          multi-task least squares, matrix target (q >= 1)
* ``logreg``       binary logistic, labels in {0, 1} (q = 1)
* ``multinomial``  multinomial logistic, one-hot target rows (q >= 2)

Everything below works on the stacked representation: coefficients
B (p, q), linear predictor Z = X B (n, q), targets Y (n, q).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, softmax, xlogy

from .linalg import DesignMatrix

__all__ = [
    "ModelSpec",
    "ProblemInstance",
    "loss_value",
    "conjugate_value",
    "gradient_map",
    "lambda_max",
    "primal_value",
    "dual_value",
    "duality_gap",
    "dual_linf_l2_norm",
    "group_norm_sum",
]

KINDS = ("lasso", "mtl", "logreg", "multinomial")

# Feasible points perturbed by roundoff are clamped back into the
# conjugate domain rather than mapped to +inf.
DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """Loss choice plus targets; gamma is the dual strong-convexity constant."""

    kind: str
    Y: np.ndarray
    gamma: float = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        Y = np.ascontiguousarray(np.asarray(self.Y, dtype=np.float64))
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.ndim != 2:
            raise ValueError("targets must be a vector or a 2-d array")
        if self.kind in ("lasso", "logreg") and Y.shape[1] != 1:
            raise ValueError(f"{self.kind} requires a single target column")
        if self.kind == "logreg" and not np.all((Y == 0.0) | (Y == 1.0)):
            raise ValueError("logistic labels must be in {0, 1}")
        if self.kind == "multinomial":
            if Y.shape[1] < 2:
                raise ValueError("multinomial requires q >= 2 classes")
            one_hot = np.all((Y == 0.0) | (Y == 1.0)) and np.all(Y.sum(axis=1) == 1.0)
            if not one_hot:
                raise ValueError("multinomial target rows must be one-hot")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "gamma", 4.0 if self.kind == "logreg" else 1.0)

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def q(self):
        return self.Y.shape[1]

    @property
    def is_quadratic(self):
        return self.kind in ("lasso", "mtl")

    @classmethod
    def lasso(cls, y):
        return cls("lasso", np.asarray(y, dtype=np.float64))

    @classmethod
    def multitask(cls, Y):
        return cls("mtl", Y)

    @classmethod
    def logistic(cls, y):
        return cls("logreg", np.asarray(y, dtype=np.float64))

    @classmethod
    def multinomial(cls, Y):
        return cls("multinomial", Y)

    @classmethod
    def multinomial_from_labels(cls, labels, n_classes=None):
        """Recast class indices in {1..q} to one-hot rows."""
        labels = np.asarray(labels)
        ints = labels.astype(np.int64)
        if not np.all(ints == labels):
            raise ValueError("class labels must be integers")
        if ints.min() < 1:
            raise ValueError("class labels must start at 1")
        q = int(n_classes if n_classes is not None else ints.max())
        Y = np.zeros((len(ints), q))
        Y[np.arange(len(ints)), ints - 1] = 1.0
        return cls("multinomial", Y)


@dataclass(frozen=True)
class ProblemInstance:
    X: DesignMatrix
    model: ModelSpec
    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.X.n != self.model.n:
            raise ValueError("X and Y disagree on the sample count")


def loss_value(model, Z):
    """Sum of the per-sample losses at the linear predictor Z = X B."""
    Z = np.asarray(Z)
    Y = model.Y
    if model.is_quadratic:
        R = Y - Z
        return 0.5 * float(np.vdot(R, R))
    if model.kind == "logreg":
        z = Z[:, 0]
        # log(1 + e^z) via logaddexp keeps large |z| stable
        return float(np.sum(np.logaddexp(0.0, z) - Y[:, 0] * z))
    m = Z.max(axis=1)
    lse = m + np.log(np.exp(Z - m[:, None]).sum(axis=1))
    return float(np.sum(lse) - np.vdot(Y, Z))


def _neg_entropy_binary(x):
    if x < -DOMAIN_TOL or x > 1.0 + DOMAIN_TOL:
        return np.inf
    x = min(max(x, 0.0), 1.0)
    return float(xlogy(x, x) + xlogy(1.0 - x, 1.0 - x))


def _neg_entropy_simplex(x):
    x = np.asarray(x, dtype=np.float64)
    if x.min() < -DOMAIN_TOL or abs(x.sum() - 1.0) > DOMAIN_TOL * max(1.0, x.size):
        return np.inf
    x = np.clip(x, 0.0, None)
    return float(xlogy(x, x).sum())


def conjugate_value(model, i, u):
    """Convex conjugate of the i-th sample loss at u (shape (q,)).

    Returns +inf outside the effective domain (binary entropy outside
    [0, 1], simplex entropy outside the simplex), with 0 log 0 = 0.
    """
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    yi = model.Y[i]
    if model.is_quadratic:
        return 0.5 * float(u @ u) + float(yi @ u)
    if model.kind == "logreg":
        return _neg_entropy_binary(float(u[0] + yi[0]))
    return _neg_entropy_simplex(u + yi)


def gradient_map(model, Z):
    """Row-stacked gradients of the per-sample losses at Z."""
    Z = np.asarray(Z)
    if model.is_quadratic:
        return Z - model.Y
    if model.kind == "logreg":
        return expit(Z) - model.Y
    return softmax(Z, axis=1) - model.Y


def dual_linf_l2_norm(X, M, active=None):
    """max_j ||x_j^T M||_2, the dual of the row-group l1/l2 norm.

    With ``active`` (boolean mask over columns) the maximum runs over the
    unmasked columns only; screening-safety requires the full-column
    version wherever a dual point is being certified feasible.
    """
    C = X.t_matmul(np.asarray(M))
    norms = np.sqrt(np.einsum("jk,jk->j", C, C))
    if active is not None:
        norms = norms[active]
    if norms.size == 0:
        return 0.0
    return float(norms.max())


def lambda_max(model, X):
    """Smallest regularization at which the all-zero solution is optimal."""
    G0 = gradient_map(model, np.zeros((X.n, model.q)))
    return dual_linf_l2_norm(X, G0)


def group_norm_sum(B):
    """Sum of row l2 norms of B (the l1/l2 penalty, without lambda)."""
    B = np.asarray(B)
    return float(np.sqrt(np.einsum("jk,jk->j", B, B)).sum())


def primal_value(prob, B, Z):
    return loss_value(prob.model, Z) + prob.lam * group_norm_sum(B)


def dual_value(model, Theta, lam):
    """Dual objective; -inf when Theta leaves the dual domain."""
    Theta = np.asarray(Theta)
    Y = model.Y
    if model.is_quadratic:
        return lam * float(np.vdot(Y, Theta)) - 0.5 * lam * lam * float(np.vdot(Theta, Theta))
    U = Y - lam * Theta
    if model.kind == "logreg":
        u = U[:, 0]
        if u.min() < -DOMAIN_TOL or u.max() > 1.0 + DOMAIN_TOL:
            return -np.inf
        u = np.clip(u, 0.0, 1.0)
        return -float(xlogy(u, u).sum() + xlogy(1.0 - u, 1.0 - u).sum())
    if U.min() < -DOMAIN_TOL or np.abs(U.sum(axis=1) - 1.0).max() > DOMAIN_TOL * max(1.0, U.shape[1]):
        return -np.inf
    U = np.clip(U, 0.0, None)
    return -float(xlogy(U, U).sum())


def duality_gap(prob, B, Z, Theta):
    """P(B) - D(Theta); infinite when Theta is outside the dual domain."""
    d = dual_value(prob.model, Theta, prob.lam)
    if d == -np.inf:
        return np.inf
    return primal_value(prob, B, Z) - d
