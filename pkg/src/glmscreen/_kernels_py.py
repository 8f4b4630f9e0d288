"""Pure numpy epoch kernels; fallback when the compiled extension is absent.

Each function runs one full pass of block coordinate updates over the
given active columns, mutating B and the maintained predictor Z = X B
in place.  Shapes are the stacked ones used everywhere: B (p, q),
Z (n, q), Y (n, q), with q = 1 for the scalar models.

The compiled module in ``_kernels.pyx`` exposes the same six functions;
``glmscreen._backend`` picks one implementation at import time.
"""

import numpy as np
from scipy.special import expit, softmax

__all__ = [
    "epoch_quadratic_dense",
    "epoch_quadratic_csc",
    "epoch_logistic_dense",
    "epoch_logistic_csc",
    "epoch_multinomial_dense",
    "epoch_multinomial_csc",
]


def _shrink(u, tau):
    nrm = np.linalg.norm(u)
    if nrm <= tau:
        return np.zeros_like(u)
    return (1.0 - tau / nrm) * u


def epoch_quadratic_dense(X, Y, B, Z, active, col_sq, lam):
    for j in active:
        nsq = col_sq[j]
        if nsq <= 0.0:
            continue
        xj = X[:, j]
        u = B[j] + (xj @ Y - xj @ Z) / nsq
        new = _shrink(u, lam / nsq)
        delta = new - B[j]
        if np.any(delta != 0.0):
            Z += xj[:, None] * delta[None, :]
            B[j] = new


def epoch_quadratic_csc(data, indices, indptr, n, Y, B, Z, active, col_sq, lam):
    for j in active:
        nsq = col_sq[j]
        if nsq <= 0.0:
            continue
        lo, hi = indptr[j], indptr[j + 1]
        rows = indices[lo:hi]
        vals = data[lo:hi]
        u = B[j] + (vals @ Y[rows] - vals @ Z[rows]) / nsq
        new = _shrink(u, lam / nsq)
        delta = new - B[j]
        if np.any(delta != 0.0):
            Z[rows] += vals[:, None] * delta[None, :]
            B[j] = new


def epoch_logistic_dense(X, Y, B, Z, active, col_sq, lam, gamma):
    y = Y[:, 0]
    z = Z[:, 0]
    for j in active:
        nsq = col_sq[j]
        if nsq <= 0.0:
            continue
        xj = X[:, j]
        step = gamma / nsq  # 1 / L_j
        g = xj @ (expit(z) - y)
        new = _shrink(np.array([B[j, 0] - g * step]), lam * step)[0]
        delta = new - B[j, 0]
        if delta != 0.0:
            z += xj * delta
            B[j, 0] = new


def epoch_logistic_csc(data, indices, indptr, n, Y, B, Z, active, col_sq, lam, gamma):
    y = Y[:, 0]
    z = Z[:, 0]
    for j in active:
        nsq = col_sq[j]
        if nsq <= 0.0:
            continue
        lo, hi = indptr[j], indptr[j + 1]
        rows = indices[lo:hi]
        vals = data[lo:hi]
        step = gamma / nsq
        g = vals @ (expit(z[rows]) - y[rows])
        new = _shrink(np.array([B[j, 0] - g * step]), lam * step)[0]
        delta = new - B[j, 0]
        if delta != 0.0:
            z[rows] += vals * delta
            B[j, 0] = new


def epoch_multinomial_dense(X, Y, B, Z, active, col_sq, lam, gamma):
    for j in active:
        nsq = col_sq[j]
        if nsq <= 0.0:
            continue
        xj = X[:, j]
        step = gamma / nsq
        g = xj @ (softmax(Z, axis=1) - Y)
        new = _shrink(B[j] - g * step, lam * step)
        delta = new - B[j]
        if np.any(delta != 0.0):
            Z += xj[:, None] * delta[None, :]
            B[j] = new


def epoch_multinomial_csc(data, indices, indptr, n, Y, B, Z, active, col_sq, lam, gamma):
    for j in active:
        nsq = col_sq[j]
        if nsq <= 0.0:
            continue
        lo, hi = indptr[j], indptr[j + 1]
        rows = indices[lo:hi]
        vals = data[lo:hi]
        step = gamma / nsq
        g = vals @ (softmax(Z[rows], axis=1) - Y[rows])
        new = _shrink(B[j] - g * step, lam * step)
        delta = new - B[j]
        if np.any(delta != 0.0):
            Z[rows] += vals[:, None] * delta[None, :]
            B[j] = new
