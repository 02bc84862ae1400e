"""Full re-solve oracle on the three-arm bandit, shared by unit and acceptance tests."""
import numpy as np
from scipy.optimize import minimize

from barfi.implicit import NeumannConfig, phi_update
from barfi.inner import Batch, InnerRegularizer, Trajectory, inner_objective
from barfi.policy import SoftmaxLinearPolicy
from barfi.reward import AlignmentReward, LearnedDiscount

BANDIT_R = np.array([0.2, 0.5, 1.0])


def bandit_batch():
    return Batch([Trajectory([[1.0]], [a], [BANDIT_R[a]], [0.0], [0.0]) for a in range(3) for _ in range(4)])


def solve_inner(phi, batch, lam):
    pol = SoftmaxLinearPolicy(1, 3)
    rm = AlignmentReward(1, phi)
    disc = LearnedDiscount()

    def neg(th):
        return -(inner_objective(pol, batch, rm, disc, th) - 0.5 * lam * th @ th)

    return minimize(neg, np.zeros(3), method="BFGS", options={"gtol": 1e-12}).x


def bandit_J(theta):
    p = np.exp(theta - theta.max())
    return p @ BANDIT_R / p.sum()


def bandit_cosines(count, rng, lam=0.5):
    batch = bandit_batch()
    disc = LearnedDiscount()
    cos = []
    for _ in range(count):
        phi = rng.normal(size=3)
        theta = solve_inner(phi, batch, lam)
        eps = 1e-4
        fd = np.array([(bandit_J(solve_inner(phi + eps * e, batch, lam))
                        - bandit_J(solve_inner(phi - eps * e, batch, lam))) / (2 * eps) for e in np.eye(3)])
        p = np.exp(theta - theta.max())
        p /= p.sum()
        v = (np.diag(p) - np.outer(p, p)) @ BANDIT_R
        pol = SoftmaxLinearPolicy(1, 3, theta)
        g = phi_update(pol, AlignmentReward(1, phi), disc, batch, None, NeumannConfig(1.0, 200), 0.0, 0.99,
                       InnerRegularizer("l2", lam), v=v)
        cos.append(g @ fd / (np.linalg.norm(g) * np.linalg.norm(fd)))
    return np.array(cos)
