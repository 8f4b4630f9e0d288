import numpy as np
import pytest
import scipy.sparse as sp

from glmscreen.datasets import make_synthetic
from glmscreen.models import ProblemInstance
from glmscreen.solver import RULE_GAP, SolverConfig, solve


def random_instance(kind, seed, n=40, p=100, q=3, sparse=False, noise=0.1,
                    n_nonzero=8, amplitude=1.0):
    X, model, B_true = make_synthetic(
        kind, n, p, q=q, n_nonzero=n_nonzero, noise=noise,
        density=0.3 if sparse else 1.0, amplitude=amplitude, seed=seed,
    )
    return X, model


def reference_solve(X, model, lam, tol=1e-12, max_epochs=500_000):
    prob = ProblemInstance(X, model, lam)
    cfg = SolverConfig(gap_tolerance=tol, max_epochs=max_epochs, rule=RULE_GAP)
    res = solve(prob, cfg)
    assert res.converged, f"reference solve did not reach gap {tol}"
    return res


def sparse_copy(X):
    from glmscreen.linalg import DesignMatrix

    return DesignMatrix(sp.csc_matrix(X.toarray()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
