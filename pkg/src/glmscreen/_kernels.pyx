# Compiled epoch kernels; mirrors the signatures of _kernels_py.
#
# One call = one full pass of block coordinate updates over the active
# columns, updating B and Z = X B in place.  Shapes: B (p, q), Z (n, q),
# Y (n, q); q = 1 for the scalar models.

import numpy as np

cimport cython
from libc.math cimport exp, log, sqrt


cdef inline double _shrink_scale(double norm_u, double tau) noexcept nogil:
    # (1 - tau/||u||)+ ; zero block when ||u|| <= tau
    if norm_u <= tau:
        return 0.0
    return 1.0 - tau / norm_u


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def epoch_quadratic_dense(double[::1, :] X, double[:, ::1] Y, double[:, ::1] B,
                          double[:, ::1] Z, Py_ssize_t[::1] active,
                          double[::1] col_sq, double lam):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t q = Y.shape[1]
    cdef Py_ssize_t a, j, i, k
    cdef double nsq, xij, unorm, scale, changed
    u_arr = np.empty(q)
    d_arr = np.empty(q)
    cdef double[::1] u = u_arr
    cdef double[::1] d = d_arr
    with nogil:
        for a in range(active.shape[0]):
            j = active[a]
            nsq = col_sq[j]
            if nsq <= 0.0:
                continue
            for k in range(q):
                u[k] = 0.0
            for i in range(n):
                xij = X[i, j]
                for k in range(q):
                    u[k] += xij * (Y[i, k] - Z[i, k])
            unorm = 0.0
            for k in range(q):
                u[k] = B[j, k] + u[k] / nsq
                unorm += u[k] * u[k]
            scale = _shrink_scale(sqrt(unorm), lam / nsq)
            changed = 0.0
            for k in range(q):
                d[k] = scale * u[k] - B[j, k]
                changed += d[k] * d[k]
            if changed != 0.0:
                for i in range(n):
                    xij = X[i, j]
                    for k in range(q):
                        Z[i, k] += xij * d[k]
                for k in range(q):
                    B[j, k] = scale * u[k]


def epoch_quadratic_csc(double[::1] data, int[::1] indices, int[::1] indptr,
                        Py_ssize_t n, double[:, ::1] Y, double[:, ::1] B,
                        double[:, ::1] Z, Py_ssize_t[::1] active,
                        double[::1] col_sq, double lam):
    cdef Py_ssize_t q = Y.shape[1]
    cdef Py_ssize_t a, j, k, t, row
    cdef int lo, hi
    cdef double nsq, v, unorm, scale, changed
    u_arr = np.empty(q)
    d_arr = np.empty(q)
    cdef double[::1] u = u_arr
    cdef double[::1] d = d_arr
    with nogil:
        for a in range(active.shape[0]):
            j = active[a]
            nsq = col_sq[j]
            if nsq <= 0.0:
                continue
            lo = indptr[j]
            hi = indptr[j + 1]
            for k in range(q):
                u[k] = 0.0
            for t in range(lo, hi):
                row = indices[t]
                v = data[t]
                for k in range(q):
                    u[k] += v * (Y[row, k] - Z[row, k])
            unorm = 0.0
            for k in range(q):
                u[k] = B[j, k] + u[k] / nsq
                unorm += u[k] * u[k]
            scale = _shrink_scale(sqrt(unorm), lam / nsq)
            changed = 0.0
            for k in range(q):
                d[k] = scale * u[k] - B[j, k]
                changed += d[k] * d[k]
            if changed != 0.0:
                for t in range(lo, hi):
                    row = indices[t]
                    v = data[t]
                    for k in range(q):
                        Z[row, k] += v * d[k]
                for k in range(q):
                    B[j, k] = scale * u[k]


def epoch_logistic_dense(double[::1, :] X, double[:, ::1] Y, double[:, ::1] B,
                         double[:, ::1] Z, Py_ssize_t[::1] active,
                         double[::1] col_sq, double lam, double gamma):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t a, j, i
    cdef double nsq, step, g, u, au, new, delta
    with nogil:
        for a in range(active.shape[0]):
            j = active[a]
            nsq = col_sq[j]
            if nsq <= 0.0:
                continue
            step = gamma / nsq
            g = 0.0
            for i in range(n):
                g += X[i, j] * (_sigmoid(Z[i, 0]) - Y[i, 0])
            u = B[j, 0] - g * step
            au = u if u >= 0.0 else -u
            new = _shrink_scale(au, lam * step) * u
            delta = new - B[j, 0]
            if delta != 0.0:
                for i in range(n):
                    Z[i, 0] += X[i, j] * delta
                B[j, 0] = new


def epoch_logistic_csc(double[::1] data, int[::1] indices, int[::1] indptr,
                       Py_ssize_t n, double[:, ::1] Y, double[:, ::1] B,
                       double[:, ::1] Z, Py_ssize_t[::1] active,
                       double[::1] col_sq, double lam, double gamma):
    cdef Py_ssize_t a, j, t, row
    cdef int lo, hi
    cdef double nsq, step, g, u, au, new, delta
    with nogil:
        for a in range(active.shape[0]):
            j = active[a]
            nsq = col_sq[j]
            if nsq <= 0.0:
                continue
            lo = indptr[j]
            hi = indptr[j + 1]
            step = gamma / nsq
            g = 0.0
            for t in range(lo, hi):
                row = indices[t]
                g += data[t] * (_sigmoid(Z[row, 0]) - Y[row, 0])
            u = B[j, 0] - g * step
            au = u if u >= 0.0 else -u
            new = _shrink_scale(au, lam * step) * u
            delta = new - B[j, 0]
            if delta != 0.0:
                for t in range(lo, hi):
                    Z[indices[t], 0] += data[t] * delta
                B[j, 0] = new


@cython.cdivision(True)
cdef inline void _softmax_minus_row(double[:, ::1] Z, double[:, ::1] Y,
                                    Py_ssize_t i, Py_ssize_t q,
                                    double[::1] out) noexcept nogil:
    # out[k] = softmax(Z[i])_k - Y[i, k], max-shift stabilized
    cdef Py_ssize_t k
    cdef double m = Z[i, 0]
    cdef double s = 0.0
    for k in range(1, q):
        if Z[i, k] > m:
            m = Z[i, k]
    for k in range(q):
        out[k] = exp(Z[i, k] - m)
        s += out[k]
    for k in range(q):
        out[k] = out[k] / s - Y[i, k]


def epoch_multinomial_dense(double[::1, :] X, double[:, ::1] Y, double[:, ::1] B,
                            double[:, ::1] Z, Py_ssize_t[::1] active,
                            double[::1] col_sq, double lam, double gamma):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t q = Y.shape[1]
    cdef Py_ssize_t a, j, i, k
    cdef double nsq, step, xij, unorm, scale, changed
    g_arr = np.empty(q)
    row_arr = np.empty(q)
    u_arr = np.empty(q)
    d_arr = np.empty(q)
    cdef double[::1] g = g_arr
    cdef double[::1] row = row_arr
    cdef double[::1] u = u_arr
    cdef double[::1] d = d_arr
    with nogil:
        for a in range(active.shape[0]):
            j = active[a]
            nsq = col_sq[j]
            if nsq <= 0.0:
                continue
            step = gamma / nsq
            for k in range(q):
                g[k] = 0.0
            for i in range(n):
                xij = X[i, j]
                _softmax_minus_row(Z, Y, i, q, row)
                for k in range(q):
                    g[k] += xij * row[k]
            unorm = 0.0
            for k in range(q):
                u[k] = B[j, k] - g[k] * step
                unorm += u[k] * u[k]
            scale = _shrink_scale(sqrt(unorm), lam * step)
            changed = 0.0
            for k in range(q):
                d[k] = scale * u[k] - B[j, k]
                changed += d[k] * d[k]
            if changed != 0.0:
                for i in range(n):
                    xij = X[i, j]
                    for k in range(q):
                        Z[i, k] += xij * d[k]
                for k in range(q):
                    B[j, k] = scale * u[k]


def epoch_multinomial_csc(double[::1] data, int[::1] indices, int[::1] indptr,
                          Py_ssize_t n, double[:, ::1] Y, double[:, ::1] B,
                          double[:, ::1] Z, Py_ssize_t[::1] active,
                          double[::1] col_sq, double lam, double gamma):
    cdef Py_ssize_t q = Y.shape[1]
    cdef Py_ssize_t a, j, k, t, row_i
    cdef int lo, hi
    cdef double nsq, step, v, unorm, scale, changed
    g_arr = np.empty(q)
    row_arr = np.empty(q)
    u_arr = np.empty(q)
    d_arr = np.empty(q)
    cdef double[::1] g = g_arr
    cdef double[::1] row = row_arr
    cdef double[::1] u = u_arr
    cdef double[::1] d = d_arr
    with nogil:
        for a in range(active.shape[0]):
            j = active[a]
            nsq = col_sq[j]
            if nsq <= 0.0:
                continue
            lo = indptr[j]
            hi = indptr[j + 1]
            step = gamma / nsq
            for k in range(q):
                g[k] = 0.0
            for t in range(lo, hi):
                row_i = indices[t]
                v = data[t]
                _softmax_minus_row(Z, Y, row_i, q, row)
                for k in range(q):
                    g[k] += v * row[k]
            unorm = 0.0
            for k in range(q):
                u[k] = B[j, k] - g[k] * step
                unorm += u[k] * u[k]
            scale = _shrink_scale(sqrt(unorm), lam * step)
            changed = 0.0
            for k in range(q):
                d[k] = scale * u[k] - B[j, k]
                changed += d[k] * d[k]
            if changed != 0.0:
                for t in range(lo, hi):
                    row_i = indices[t]
                    v = data[t]
                    for k in range(q):
                        Z[row_i, k] += v * d[k]
                for k in range(q):
                    B[j, k] = scale * u[k]
