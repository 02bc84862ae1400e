"""
Checking the outer gradient against a brute-force oracle
========================================================

On a three-armed bandit the inner problem (L2-regularized policy gradient
on the learned reward) can be solved to machine precision, so the effect of
a change in the reward parameters on the true objective can be measured by
re-solving.  The implicit estimate should point the same way.
"""

import numpy as np
from scipy.optimize import minimize

from barfi.implicit import NeumannConfig, phi_update
from barfi.inner import Batch, InnerRegularizer, Trajectory, inner_objective
from barfi.policy import SoftmaxLinearPolicy
from barfi.reward import AlignmentReward, LearnedDiscount

R = np.array([0.2, 0.5, 1.0])
LAM = 0.5
# four logged pulls of each arm
batch = Batch([Trajectory([[1.0]], [a], [R[a]], [0.0], [0.0]) for a in range(3) for _ in range(4)])
disc = LearnedDiscount()


def solve(phi):
    pol = SoftmaxLinearPolicy(1, 3)
    rm = AlignmentReward(1, phi)
    loss = lambda th: -(inner_objective(pol, batch, rm, disc, th) - 0.5 * LAM * th @ th)
    return minimize(loss, np.zeros(3), method="BFGS", options={"gtol": 1e-12}).x


def J(theta):
    p = np.exp(theta - theta.max())
    return p @ R / p.sum()


rng = np.random.default_rng(0)
for trial in range(5):
    phi = rng.normal(size=3)
    theta = solve(phi)
    p = np.exp(theta - theta.max())
    p /= p.sum()
    v = (np.diag(p) - np.outer(p, p)) @ R  # exact dJ/dtheta
    g = phi_update(SoftmaxLinearPolicy(1, 3, theta), AlignmentReward(1, phi), disc, batch, None,
                   NeumannConfig(1.0, 200), 0.0, 0.99, InnerRegularizer("l2", LAM), v=v)
    fd = np.array([(J(solve(phi + 1e-4 * e)) - J(solve(phi - 1e-4 * e))) / 2e-4 for e in np.eye(3)])
    cos = g @ fd / np.linalg.norm(g) / np.linalg.norm(fd)
    print("trial %d  |g| %.4f  |fd| %.4f  cosine %.6f" % (trial, np.linalg.norm(g), np.linalg.norm(fd), cos))
