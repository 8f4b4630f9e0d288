"""Data ingestion (svmlight, CSV), synthetic generation, writers.

The svmlight text format is the usual "label idx:val idx:val ..." with
1-based feature indices; indices are remapped to 0-based columns.
Duplicate indices on a line are always rejected; out-of-order indices
are sorted unless ``strict_order`` is set, in which case they are a
parse error too.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, softmax

from .linalg import DesignMatrix
from .models import ModelSpec

__all__ = [
    "Dataset",
    "ParseError",
    "load_svmlight",
    "dump_svmlight",
    "load_csv_dense",
    "make_synthetic",
    "edpp_counterexample",
    "model_from_labels",
]


class ParseError(ValueError):
    pass


@dataclass
class Dataset:
    X: DesignMatrix
    labels: np.ndarray
    provenance: str = ""


def load_svmlight(path, n_features=None, strict_order=False):
    """Parse an svmlight/libsvm file into a sparse Dataset."""
    labels = []
    rows = []
    cols = []
    vals = []
    max_col = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad label {parts[0]!r}") from None
            i = len(labels) - 1
            seen = set()
            line_cols = []
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad feature token {tok!r}") from None
                if idx < 1:
                    raise ParseError(f"{path}:{lineno}: feature indices are 1-based, got {idx}")
                if idx in seen:
                    raise ParseError(f"{path}:{lineno}: duplicate feature index {idx}")
                seen.add(idx)
                if strict_order and line_cols and idx - 1 <= line_cols[-1]:
                    raise ParseError(f"{path}:{lineno}: feature indices out of order")
                line_cols.append(idx - 1)
                rows.append(i)
                cols.append(idx - 1)
                vals.append(val)
                max_col = max(max_col, idx - 1)
    n = len(labels)
    if n == 0:
        raise ParseError(f"{path}: no data lines")
    p = n_features if n_features is not None else max_col + 1
    if max_col >= p:
        raise ParseError(f"{path}: feature index {max_col + 1} exceeds n_features={p}")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, max(p, 0))).tocsc()
    return Dataset(DesignMatrix(mat), np.asarray(labels), provenance=f"svmlight:{path}")


def dump_svmlight(dataset, path):
    """Write a Dataset back out; round-trips structure and values exactly."""
    X = dataset.X
    labels = np.asarray(dataset.labels)
    if labels.ndim != 1:
        raise ValueError("svmlight stores a single label per line")
    csr = sp.csr_matrix(X.mat if X.is_sparse else X.toarray())
    csr.sort_indices()
    with open(path, "w") as fh:
        for i in range(X.n):
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            feats = " ".join(
                f"{j + 1}:{v:.17g}" for j, v in zip(csr.indices[lo:hi], csr.data[lo:hi])
            )
            fh.write(f"{labels[i]:.17g} {feats}".rstrip() + "\n")


def _is_float(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def load_csv_dense(path, label_column=0, label_columns=None):
    """Rectangular numeric CSV -> dense Dataset.

    A header row is auto-detected by a non-numeric first line.  With
    ``label_columns`` (an iterable) several columns become a matrix
    target, as needed by the multi-task model.
    """
    with open(path) as fh:
        raw = [line.rstrip("\n") for line in fh if line.strip()]
    if not raw:
        raise ParseError(f"{path}: empty file")
    first = raw[0].split(",")
    start = 0
    if not all(_is_float(tok) for tok in first):
        start = 1
        if len(raw) == 1:
            raise ParseError(f"{path}: header only, no data")
    width = len(raw[start].split(","))
    data = np.empty((len(raw) - start, width))
    for r, line in enumerate(raw[start:], start=start + 1):
        toks = line.split(",")
        if len(toks) != width:
            raise ParseError(f"{path}:{r}: expected {width} fields, got {len(toks)}")
        for c, tok in enumerate(toks):
            if not _is_float(tok):
                raise ParseError(f"{path}:{r}: non-numeric cell {tok!r}")
            data[r - start - 1, c] = float(tok)
    if label_columns is not None:
        lab_idx = [c % width for c in label_columns]
    else:
        lab_idx = [label_column % width]
    feat_idx = [c for c in range(width) if c not in lab_idx]
    labels = data[:, lab_idx]
    if labels.shape[1] == 1:
        labels = labels[:, 0]
    return Dataset(DesignMatrix(data[:, feat_idx]), labels, provenance=f"csv:{path}")


def model_from_labels(kind, labels):
    """Build a ModelSpec from raw file labels for the given model kind."""
    labels = np.asarray(labels, dtype=np.float64)
    if kind == "lasso":
        return ModelSpec.lasso(labels.ravel() if labels.ndim > 1 else labels)
    if kind == "mtl":
        return ModelSpec.multitask(labels if labels.ndim == 2 else labels[:, None])
    if kind == "logreg":
        return ModelSpec.logistic(labels.ravel())
    if kind == "multinomial":
        return ModelSpec.multinomial_from_labels(labels.ravel())
    raise ValueError(f"unknown model kind {kind!r}")


def make_synthetic(kind, n, p, q=1, n_nonzero=10, noise=0.1, density=1.0,
                   amplitude=1.0, seed=0):
    """Gaussian design with a row-sparse ground truth.

    ``density`` < 1 produces a sparse design (entries kept with that
    probability).  Regression targets get ``noise`` * standard normal
    added; classification labels are sampled from the model
    probabilities at the ground truth.  Returns (DesignMatrix,
    ModelSpec, B_true).
    """
    rng = np.random.default_rng(seed)
    dense = rng.standard_normal((n, p))
    if density < 1.0:
        mask = rng.random((n, p)) < density
        dense = np.where(mask, dense, 0.0)
        X = DesignMatrix(sp.csc_matrix(dense))
    else:
        X = DesignMatrix(dense)
    q_eff = q if kind in ("mtl", "multinomial") else 1
    B = np.zeros((p, q_eff))
    support = rng.choice(p, size=min(n_nonzero, p), replace=False)
    signs = rng.choice([-1.0, 1.0], size=(len(support), q_eff))
    B[support] = signs * (0.5 + rng.random((len(support), q_eff))) * amplitude
    Z = dense @ B
    if kind == "lasso":
        y = Z[:, 0] + noise * rng.standard_normal(n)
        return X, ModelSpec.lasso(y), B
    if kind == "mtl":
        Y = Z + noise * rng.standard_normal((n, q_eff))
        return X, ModelSpec.multitask(Y), B
    if kind == "logreg":
        y = (rng.random(n) < expit(Z[:, 0])).astype(np.float64)
        return X, ModelSpec.logistic(y), B
    if kind == "multinomial":
        if q_eff < 2:
            raise ValueError("multinomial needs q >= 2")
        probs = softmax(Z, axis=1)
        Y = np.zeros((n, q_eff))
        for i in range(n):
            Y[i, rng.choice(q_eff, p=probs[i])] = 1.0
        return X, ModelSpec.multinomial(Y), B
    raise ValueError(f"unknown model kind {kind!r}")


def edpp_counterexample():
    """The 3 x 2 least-squares instance on which the uncorrected
    sequential rule discards an active variable.

    Columns and target are unit-norm by construction.
    """
    X = np.array(
        [
            [1.0 / np.sqrt(2.0), np.sqrt(2.0) / np.sqrt(3.0)],
            [0.0, -1.0 / np.sqrt(6.0)],
            [-1.0 / np.sqrt(2.0), -1.0 / np.sqrt(6.0)],
        ]
    )
    y = np.array([1.0 / np.sqrt(6.0), 1.0 / np.sqrt(6.0), -np.sqrt(2.0) / np.sqrt(3.0)])
    return DesignMatrix(X), y
