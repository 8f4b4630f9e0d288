"""Design-matrix storage and the column kernels shared by every module.

Two layouts are supported: dense Fortran-ordered arrays (fast column
access) and compressed sparse column.  All solver and screening kernels
only ever read columns of X, so no row-major layout is provided.
"""

import numpy as np
import scipy.sparse as sp

__all__ = ["DesignMatrix", "col_dot_mat", "col_norm", "add_scaled_outer"]


class DesignMatrix:
    """n x p feature matrix, dense or CSC, with cached column l2 norms.

    Immutable after construction; column norms are computed lazily on
    first access.  Zero-norm columns are legal and handled by callers
    (they are screened out, never divided by).
    """

    def __init__(self, mat):
        if sp.issparse(mat):
            mat = mat.tocsc().astype(np.float64)
            mat.sum_duplicates()
            mat.sort_indices()
            if mat.indices.dtype != np.int32 or mat.indptr.dtype != np.int32:
                mat = sp.csc_matrix(
                    (mat.data, mat.indices.astype(np.int32),
                     mat.indptr.astype(np.int32)),
                    shape=mat.shape,
                )
            self._sparse = True
        else:
            mat = np.asfortranarray(np.asarray(mat, dtype=np.float64))
            if mat.ndim != 2:
                raise ValueError("design matrix must be 2-dimensional")
            self._sparse = False
        self._mat = mat
        self._col_norms = None

    @property
    def n(self):
        return self._mat.shape[0]

    @property
    def p(self):
        return self._mat.shape[1]

    @property
    def shape(self):
        return self._mat.shape

    @property
    def is_sparse(self):
        return self._sparse

    @property
    def mat(self):
        """The underlying container (Fortran ndarray or csc_matrix)."""
        return self._mat

    @property
    def col_norms(self):
        if self._col_norms is None:
            if self._sparse:
                sq = np.asarray(self._mat.multiply(self._mat).sum(axis=0))
                self._col_norms = np.sqrt(sq.ravel())
            else:
                self._col_norms = np.sqrt(np.einsum("ij,ij->j", self._mat, self._mat))
        return self._col_norms

    @property
    def col_sq_norms(self):
        return self.col_norms ** 2

    def col_norm(self, j):
        if not 0 <= j < self.p:
            raise IndexError(f"column index {j} out of range for p={self.p}")
        return self.col_norms[j]

    def col_dot_mat(self, j, M):
        """x_j^T M for M of shape (n, q); sparse path touches nnz rows only."""
        M = np.asarray(M)
        if not 0 <= j < self.p:
            raise IndexError(f"column index {j} out of range for p={self.p}")
        if M.shape[0] != self.n:
            raise ValueError(f"M has {M.shape[0]} rows, expected {self.n}")
        if self._sparse:
            lo, hi = self._mat.indptr[j], self._mat.indptr[j + 1]
            rows = self._mat.indices[lo:hi]
            vals = self._mat.data[lo:hi]
            return vals @ M[rows]
        return self._mat[:, j] @ M

    def add_scaled_outer(self, Z, j, delta):
        """Z += x_j delta^T in place; sparse path touches nnz rows only."""
        delta = np.asarray(delta, dtype=np.float64)
        if not 0 <= j < self.p:
            raise IndexError(f"column index {j} out of range for p={self.p}")
        if Z.shape[0] != self.n or Z.shape[1] != delta.shape[0]:
            raise ValueError("Z/delta dimensions inconsistent with X")
        if self._sparse:
            lo, hi = self._mat.indptr[j], self._mat.indptr[j + 1]
            rows = self._mat.indices[lo:hi]
            vals = self._mat.data[lo:hi]
            Z[rows] += vals[:, None] * delta[None, :]
        else:
            Z += self._mat[:, j][:, None] * delta[None, :]
        return Z

    def matmul(self, B):
        """X @ B as a dense (n, q) array."""
        out = self._mat @ B
        return np.ascontiguousarray(out)

    def t_matmul(self, M):
        """X.T @ M as a dense (p, q) array."""
        out = self._mat.T @ M
        return np.ascontiguousarray(out)

    def toarray(self):
        if self._sparse:
            return self._mat.toarray()
        return np.array(self._mat)


def col_dot_mat(X, j, M):
    return X.col_dot_mat(j, M)


def col_norm(X, j):
    return X.col_norm(j)


def add_scaled_outer(Z, X, j, delta):
    return X.add_scaled_outer(Z, j, delta)
