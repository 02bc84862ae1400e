"""Ridge regression with a tunable prior: the implicit gradient in closed form.

The inner problem minimizes ``0.5 |X theta - y|^2 + 0.5 lam |theta - theta0|^2``
on the training split; the outer objective is ``0.5 |X_val theta - y_val|^2``.
"""
from dataclasses import dataclass

import numpy as np

from .implicit import NeumannConfig, hvp, implicit_gradient


@dataclass
class RidgeProblem:
    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray
    theta0: np.ndarray
    lam: float

    def __post_init__(self):
        self.X_train = np.atleast_2d(np.asarray(self.X_train, dtype=np.float64))
        self.X_val = np.atleast_2d(np.asarray(self.X_val, dtype=np.float64))
        self.y_train = np.asarray(self.y_train, dtype=np.float64).reshape(-1)
        self.y_val = np.asarray(self.y_val, dtype=np.float64).reshape(-1)
        self.theta0 = np.asarray(self.theta0, dtype=np.float64).reshape(-1)
        d = self.theta0.size
        if self.X_train.shape != (self.y_train.size, d) or self.X_val.shape != (self.y_val.size, d):
            raise ValueError("data shapes do not match theta0")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")

    def with_lam(self, lam):
        return RidgeProblem(self.X_train, self.y_train, self.X_val, self.y_val, self.theta0, lam)

    def hessian(self):
        return self.X_train.T @ self.X_train + self.lam * np.eye(self.theta0.size)

    def val_loss(self, theta):
        r = self.X_val @ theta - self.y_val
        return 0.5 * float(r @ r)

    def val_grad(self, theta):
        return self.X_val.T @ (self.X_val @ theta - self.y_val)

    def update(self, theta):
        """Ascent direction on the regularized training objective."""
        return -(self.X_train.T @ (self.X_train @ theta - self.y_train) + self.lam * (theta - self.theta0))


def inner_solve(problem):
    rhs = problem.X_train.T @ problem.y_train + problem.lam * problem.theta0
    try:
        return np.linalg.solve(problem.hessian(), rhs)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("ridge system is singular") from exc


def implicit_lambda_grad(problem, theta_star=None):
    """``d f_val / d lam = grad f_val(theta*)^T (X^T X + lam I)^-1 (theta0 - theta*)``."""
    t = inner_solve(problem) if theta_star is None else theta_star
    return float(problem.val_grad(t) @ np.linalg.solve(problem.hessian(), problem.theta0 - t))


def neumann_lambda_grad(problem, cfg=None, theta_star=None):
    """The same gradient through the generic finite-difference + Neumann path."""
    t = inner_solve(problem) if theta_star is None else theta_star
    if cfg is None:
        cfg = NeumannConfig(eta=1.0 / np.linalg.eigvalsh(problem.hessian())[-1], n=200)
    # d update / d lam = theta0 - theta*; the outer ascent objective is -f_val
    grad, _ = implicit_gradient(
        -problem.val_grad(t),
        lambda u: hvp(problem.update, t, u),
        lambda w: float(w @ (problem.theta0 - t)),
        cfg,
    )
    return -grad


def finite_difference_lambda_grad(problem, eps=None):
    eps = 1e-5 * max(problem.lam, 1.0) if eps is None else eps
    up = problem.val_loss(inner_solve(problem.with_lam(problem.lam + eps)))
    down = problem.val_loss(inner_solve(problem.with_lam(problem.lam - eps)))
    return (up - down) / (2.0 * eps)


def random_problem(rng, dim=5, n_train=20, n_val=20, lam=1.0, noise=0.5):
    w = rng.normal(size=dim)
    X = rng.normal(size=(n_train, dim))
    Xv = rng.normal(size=(n_val, dim))
    return RidgeProblem(
        X, X @ w + noise * rng.normal(size=n_train), Xv, Xv @ w + noise * rng.normal(size=n_val),
        rng.normal(size=dim), lam,
    )
