import numpy as np
import pytest

from barfi.implicit import NeumannConfig
from barfi.ridge import (
    RidgeProblem,
    finite_difference_lambda_grad,
    implicit_lambda_grad,
    inner_solve,
    neumann_lambda_grad,
    random_problem,
)


def one_d(lam=1.0, theta0=0.0):
    return RidgeProblem([[1.0]], [1.0], [[1.0]], [1.0], [theta0], lam)


def test_inner_solve_examples(rng):
    assert inner_solve(one_d())[0] == pytest.approx(0.5)
    p = random_problem(rng)
    X = rng.normal(size=(5, 5))
    y = rng.normal(size=5)
    sq = RidgeProblem(X, y, p.X_val, p.y_val, p.theta0, 0.0)
    np.testing.assert_allclose(inner_solve(sq), np.linalg.solve(X, y), rtol=1e-9)


def test_large_lambda_pulls_to_prior(rng):
    p = random_problem(rng)
    ls = np.linalg.lstsq(p.X_train, p.y_train, rcond=None)[0]
    far = inner_solve(p.with_lam(1e6))
    assert np.linalg.norm(far - p.theta0) <= 1e-3 * np.linalg.norm(ls - p.theta0)


def test_implicit_grad_closed_form_example():
    assert implicit_lambda_grad(one_d()) == pytest.approx(0.125)


def test_grad_vanishes_at_prior(rng):
    p = random_problem(rng)
    # a prior at the training optimum makes theta* = theta0 for every lambda
    ls = np.linalg.lstsq(p.X_train, p.y_train, rcond=None)[0]
    p = RidgeProblem(p.X_train, p.y_train, p.X_val, p.y_val, ls, p.lam)
    np.testing.assert_allclose(inner_solve(p), ls, atol=1e-12)
    assert implicit_lambda_grad(p) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_matches_finite_differences(seed):
    p = random_problem(np.random.default_rng(seed))
    assert implicit_lambda_grad(p) == pytest.approx(finite_difference_lambda_grad(p), rel=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_shared_neumann_pipeline(seed):
    p = random_problem(np.random.default_rng(seed))
    eta = 0.9 / np.linalg.eigvalsh(p.hessian())[-1]
    assert neumann_lambda_grad(p, NeumannConfig(eta, 200)) == pytest.approx(implicit_lambda_grad(p), rel=1e-4)


def test_shape_validation():
    with pytest.raises(ValueError):
        RidgeProblem(np.zeros((3, 2)), np.zeros(3), np.zeros((2, 3)), np.zeros(2), np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        one_d(lam=-1.0)
