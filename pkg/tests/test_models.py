import math

import numpy as np
import pytest

from glmscreen.linalg import DesignMatrix
from glmscreen.models import (
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
from oracles import _loss_at, fd_gradient, grid_conjugate, scalar_lasso_solution


def _loss_row(model, i, z):
    return float(_loss_at(model, i, np.atleast_1d(z)[None, :])[0])


def test_model_spec_validation():
    assert ModelSpec.lasso([1.0, 2.0]).gamma == 1.0
    assert ModelSpec.logistic([0.0, 1.0]).gamma == 4.0
    assert ModelSpec.multinomial(np.eye(3)).gamma == 1.0
    with pytest.raises(ValueError):
        ModelSpec.logistic([0.0, 2.0])
    with pytest.raises(ValueError):
        ModelSpec.multinomial(np.array([[0.5, 0.5], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        ModelSpec("mystery", np.zeros(3))


def test_multinomial_from_labels():
    m = ModelSpec.multinomial_from_labels([1, 3, 2], 3)
    assert np.array_equal(m.Y, np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=float))


def test_loss_examples():
    assert loss_value(ModelSpec.lasso([2.0]), np.array([[2.0]])) == 0.0
    assert loss_value(ModelSpec.logistic([1.0]), np.array([[0.0]])) == pytest.approx(math.log(2))
    m = ModelSpec.multinomial(np.array([[0.0, 1.0, 0.0]]))
    assert loss_value(m, np.zeros((1, 3))) == pytest.approx(math.log(3))


def test_conjugate_examples():
    assert conjugate_value(ModelSpec.logistic([0.0]), 0, [0.5]) == pytest.approx(-math.log(2))
    # boundary uses the 0 log 0 = 0 convention
    assert conjugate_value(ModelSpec.logistic([1.0]), 0, [0.0]) == 0.0
    assert conjugate_value(ModelSpec.lasso([2.0]), 0, [-1.0]) == pytest.approx(-1.5)
    assert conjugate_value(ModelSpec.logistic([0.0]), 0, [1.5]) == np.inf
    m = ModelSpec.multinomial(np.array([[1.0, 0.0]]))
    assert conjugate_value(m, 0, [0.5, 0.5]) == np.inf  # sum is 2, off the simplex


@pytest.mark.parametrize("kind,q", [("lasso", 1), ("mtl", 3), ("logreg", 1), ("multinomial", 3)])
def test_conjugate_matches_grid_supremum(kind, q, rng):
    if kind == "lasso":
        model = ModelSpec.lasso(rng.uniform(-2, 2, size=4))
    elif kind == "mtl":
        model = ModelSpec.multitask(rng.uniform(-2, 2, size=(4, q)))
    elif kind == "logreg":
        model = ModelSpec.logistic((rng.random(4) < 0.5).astype(float))
    else:
        Y = np.zeros((4, q))
        Y[np.arange(4), rng.integers(q, size=4)] = 1.0
        model = ModelSpec.multinomial(Y)
    for trial in range(10):
        i = int(rng.integers(model.n))
        if kind in ("lasso", "mtl"):
            u = rng.uniform(-3, 3, size=model.q)
        elif kind == "logreg":
            u = np.array([rng.uniform(0.01, 0.99) - model.Y[i, 0]])
        else:
            w = rng.dirichlet(np.ones(q))
            x = 0.02 / q + 0.98 * w
            u = x - model.Y[i]
        exact = conjugate_value(model, i, u)
        approx = grid_conjugate(model, i, u)
        assert approx == pytest.approx(exact, abs=1e-3)


def test_fenchel_young(rng):
    models = [
        ModelSpec.lasso(rng.uniform(-2, 2, size=3)),
        ModelSpec.multitask(rng.uniform(-2, 2, size=(3, 2))),
        ModelSpec.logistic(np.array([1.0, 0.0, 1.0])),
        ModelSpec.multinomial(np.array([[1.0, 0], [0, 1.0], [1.0, 0]])),
    ]
    for model in models:
        for _ in range(20):
            Z = rng.uniform(-2, 2, size=(model.n, model.q))
            G = gradient_map(model, Z)
            for i in range(model.n):
                z, u = Z[i], G[i]
                lhs = _loss_row(model, i, z) + conjugate_value(model, i, u)
                inner = float(z @ u)
                assert lhs >= inner - 1e-10
                assert lhs == pytest.approx(inner, abs=1e-8)
            # at a random u the inequality still holds
            u = rng.uniform(-0.4, 0.4, size=model.q)
            for i in range(model.n):
                c = conjugate_value(model, i, u)
                if np.isfinite(c):
                    assert _loss_row(model, i, Z[i]) + c >= float(Z[i] @ u) - 1e-10


def test_gradient_examples():
    assert np.allclose(gradient_map(ModelSpec.lasso([3.0]), np.array([[1.0]])), [[-2.0]])
    assert np.allclose(gradient_map(ModelSpec.logistic([1.0]), np.array([[0.0]])), [[-0.5]])
    m = ModelSpec.multinomial(np.array([[1.0, 0.0]]))
    assert np.allclose(gradient_map(m, np.zeros((1, 2))), [[-0.5, 0.5]])


@pytest.mark.parametrize("kind", ["lasso", "mtl", "logreg", "multinomial"])
def test_gradient_matches_finite_differences(kind, rng):
    q = 3 if kind in ("mtl", "multinomial") else 1
    if kind == "lasso":
        model = ModelSpec.lasso(rng.uniform(-2, 2, size=4))
    elif kind == "mtl":
        model = ModelSpec.multitask(rng.uniform(-2, 2, size=(4, q)))
    elif kind == "logreg":
        model = ModelSpec.logistic((rng.random(4) < 0.5).astype(float))
    else:
        Y = np.zeros((4, q))
        Y[np.arange(4), rng.integers(q, size=4)] = 1.0
        model = ModelSpec.multinomial(Y)
    for _ in range(5):
        Z = rng.uniform(-3, 3, size=(4, q))
        assert np.allclose(gradient_map(model, Z), fd_gradient(model, Z), atol=1e-6)


@pytest.mark.parametrize("kind", ["lasso", "mtl", "logreg", "multinomial"])
def test_gradient_lipschitz(kind, rng):
    q = 2 if kind in ("mtl", "multinomial") else 1
    if kind == "lasso":
        model = ModelSpec.lasso(rng.uniform(-2, 2, size=6))
    elif kind == "mtl":
        model = ModelSpec.multitask(rng.uniform(-2, 2, size=(6, q)))
    elif kind == "logreg":
        model = ModelSpec.logistic((rng.random(6) < 0.5).astype(float))
    else:
        Y = np.zeros((6, q))
        Y[np.arange(6), rng.integers(q, size=6)] = 1.0
        model = ModelSpec.multinomial(Y)
    for _ in range(200):
        Z1 = rng.uniform(-4, 4, size=(6, q))
        Z2 = rng.uniform(-4, 4, size=(6, q))
        lhs = np.linalg.norm(gradient_map(model, Z1) - gradient_map(model, Z2))
        rhs = np.linalg.norm(Z1 - Z2) / model.gamma
        assert lhs <= rhs + 1e-12


def test_lambda_max_examples():
    Xi = DesignMatrix(np.eye(2))
    assert lambda_max(ModelSpec.lasso([3.0, -1.0]), Xi) == pytest.approx(3.0)

    mlog = ModelSpec.logistic([1.0, 0.0])
    lmax = lambda_max(mlog, Xi)
    assert lmax == pytest.approx(0.5)
    # the all-zero solution is optimal exactly at lambda_max: zero gap there
    theta = -gradient_map(mlog, np.zeros((2, 1))) / lmax
    prob = ProblemInstance(Xi, mlog, lmax)
    assert duality_gap(prob, np.zeros((2, 1)), np.zeros((2, 1)), theta) == pytest.approx(0.0, abs=1e-12)

    mmn = ModelSpec.multinomial(np.eye(2))
    lmax2 = lambda_max(mmn, Xi)
    assert lmax2 == pytest.approx(1 / math.sqrt(2))
    theta2 = -gradient_map(mmn, np.zeros((2, 2))) / lmax2
    prob2 = ProblemInstance(Xi, mmn, lmax2)
    assert duality_gap(prob2, np.zeros((2, 2)), np.zeros((2, 2)), theta2) == pytest.approx(0.0, abs=1e-12)


def test_primal_examples():
    X = DesignMatrix(np.array([[1.0]]))
    m = ModelSpec.lasso([2.0])
    prob = ProblemInstance(X, m, 1.0)
    assert primal_value(prob, np.zeros((1, 1)), np.zeros((1, 1))) == pytest.approx(2.0)
    # the shrinkage solution beta = 1 gives (2-1)^2/2 + 1 = 1.5
    beta = scalar_lasso_solution(np.array([1.0]), np.array([2.0]), 1.0)
    assert beta == pytest.approx(1.0)
    B = np.array([[beta]])
    assert primal_value(prob, B, B.copy()) == pytest.approx(1.5)

    # multi-task penalty term only
    mt = ModelSpec.multitask(np.zeros((1, 2)))
    probm = ProblemInstance(DesignMatrix(np.zeros((1, 1))), mt, 2.0)
    B2 = np.array([[3.0, 4.0]])
    assert primal_value(probm, B2, np.zeros((1, 2))) == pytest.approx(10.0)


def test_dual_examples():
    m = ModelSpec.lasso([2.0])
    assert dual_value(m, np.array([[1.0]]), 1.0) == pytest.approx(1.5)
    assert dual_value(ModelSpec.logistic([1.0]), np.array([[0.0]]), 1.0) == pytest.approx(0.0)
    mmn = ModelSpec.multinomial(np.array([[1.0, 0.0]]))
    # -lam*Theta + Y leaves the simplex -> -inf
    assert dual_value(mmn, np.array([[5.0, 5.0]]), 1.0) == -np.inf


def test_duality_gap_examples(rng):
    X = DesignMatrix(np.array([[1.0]]))
    m = ModelSpec.lasso([2.0])
    prob = ProblemInstance(X, m, 1.0)
    B = np.array([[1.0]])
    theta = np.array([[1.0]])  # residual / lambda at the optimum
    assert duality_gap(prob, B, B.copy(), theta) == pytest.approx(0.0, abs=1e-12)

    assert duality_gap(prob, np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1))) == pytest.approx(2.0)

    # random feasible pairs keep the gap nonnegative
    Xr = DesignMatrix(rng.standard_normal((10, 5)))
    mr = ModelSpec.lasso(rng.standard_normal(10))
    lam = 0.5 * lambda_max(mr, Xr)
    probr = ProblemInstance(Xr, mr, lam)
    for _ in range(20):
        B = rng.standard_normal((5, 1))
        R = rng.standard_normal((10, 1))
        theta = R / max(lam, dual_linf_l2_norm(Xr, R))
        g = duality_gap(probr, B, Xr.matmul(B), theta)
        assert g >= -1e-10 * max(1.0, abs(primal_value(probr, B, Xr.matmul(B))))


def test_dual_norm_examples(rng):
    X = DesignMatrix(np.eye(3))
    assert dual_linf_l2_norm(X, np.zeros((3, 1))) == 0.0
    M = np.array([[1.0], [-4.0], [2.0]])
    assert dual_linf_l2_norm(X, M) == pytest.approx(4.0)

    Xr = DesignMatrix(rng.standard_normal((8, 5)))
    Mr = rng.standard_normal((8, 3))
    explicit = max(np.linalg.norm(Xr.toarray()[:, j] @ Mr) for j in range(5))
    assert dual_linf_l2_norm(Xr, Mr) == pytest.approx(explicit, rel=1e-12)
    mask = np.array([True, False, True, False, True])
    explicit_masked = max(np.linalg.norm(Xr.toarray()[:, j] @ Mr) for j in (0, 2, 4))
    assert dual_linf_l2_norm(Xr, Mr, active=mask) == pytest.approx(explicit_masked, rel=1e-12)


@pytest.mark.parametrize("kind", ["lasso", "mtl", "logreg", "multinomial"])
def test_zero_is_optimal_at_lambda_max(kind, rng):
    q = 3 if kind in ("mtl", "multinomial") else 1
    X = DesignMatrix(rng.standard_normal((12, 6)))
    if kind == "lasso":
        model = ModelSpec.lasso(rng.standard_normal(12))
    elif kind == "mtl":
        model = ModelSpec.multitask(rng.standard_normal((12, q)))
    elif kind == "logreg":
        model = ModelSpec.logistic((rng.random(12) < 0.5).astype(float))
    else:
        Y = np.zeros((12, q))
        Y[np.arange(12), rng.integers(q, size=12)] = 1.0
        model = ModelSpec.multinomial(Y)
    lmax = lambda_max(model, X)
    theta = -gradient_map(model, np.zeros((12, q))) / lmax
    prob = ProblemInstance(X, model, lmax)
    gap = duality_gap(prob, np.zeros((6, q)), np.zeros((12, q)), theta)
    assert abs(gap) <= 1e-10
