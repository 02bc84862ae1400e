"""Implicit-gradient outer updates for the reward parameters phi and varphi.

At a fixed point ``delta(theta*, phi) = 0`` of the inner ascent update the
outer gradient is ``-v H^-1 A`` with ``v = dJ/dtheta``, ``H = d delta/d theta``
and ``A = d delta/d phi``. Near a maximum H is negative definite, so the
Neumann series is run on the positive-definite ``M = -H`` instead and
``w = v M^-1`` is contracted with A directly: ``-v H^-1 A = w A``.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import NeumannDivergenceError, NonFiniteError
from .inner import (
    NO_REGULARIZER,
    alignment_rewards,
    as_batch,
    make_update_fn,
    outer_objective_grad,
    score_dot,
    step_log_probs,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NeumannConfig:
    eta: float = 5e-4
    n: int = 5

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.n < 1:
            raise ValueError("n must be a positive integer")


def hvp(update_fn, theta, v, epsilon=None):
    """Central difference ``(f(theta + eps v) - f(theta - eps v)) / (2 eps)``."""
    theta = np.asarray(theta, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    vnorm = np.linalg.norm(v)
    if vnorm == 0.0:
        return np.zeros_like(v)
    if epsilon is None:
        epsilon = 1e-4 * (1.0 + np.linalg.norm(theta)) / max(vnorm, 1e-12)
    out = (update_fn(theta + epsilon * v) - update_fn(theta - epsilon * v)) / (2.0 * epsilon)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("Hessian-vector product is not finite")
    return out


def softmax_hvp(policy, batch, returns, theta, v):
    """Exact ``H v`` for ``delta(theta) = mean sum_t psi_t G_t`` with fixed returns."""
    batch = as_batch(batch)
    probs = policy.action_probs(batch.X, theta)
    u = batch.X @ policy.weights(v).T
    dpsi = probs * (u - np.sum(probs * u, axis=1, keepdims=True))
    return -((dpsi * returns[:, None]).T @ batch.X).ravel() / batch.size


def neumann_vhinv(v, hvp_fn, cfg):
    """``eta * sum_{i=0..n} (I - eta H)^i v``, an approximation of ``v H^-1``.

    Assumes H is symmetric positive definite with ``eta * lambda_max < 2``.
    Raises :class:`NeumannDivergenceError` once a term exceeds 10x ``|v|``.
    """
    cur = np.array(v, dtype=np.float64)
    limit = 10.0 * np.linalg.norm(cur)
    total = cur.copy()
    for i in range(cfg.n):
        cur = cur - cfg.eta * hvp_fn(cur)
        if not np.all(np.isfinite(cur)):
            raise NonFiniteError(f"Neumann term {i + 1} is not finite")
        if np.linalg.norm(cur) > limit:
            raise NeumannDivergenceError(f"Neumann series diverging at term {i + 1}; eta={cfg.eta} is too large")
        total += cur
    return cfg.eta * total


def implicit_gradient(v, hvp_fn, contract, cfg):
    """``-v H^-1 A`` for an ascent fixed point; returns (gradient, w).

    ``hvp_fn`` multiplies by H (negative definite), ``contract(w)`` computes
    ``w A`` without forming A.
    """
    w = neumann_vhinv(v, lambda u: -hvp_fn(u), cfg)
    return contract(w), w


def contract_phi(policy, batch, disc, w):
    """``w . A``: ``mean sum_t (w . psi_t) sum_{j>=t} gamma^(j-t) dr_phi(S_j, A_j)/dphi``.

    Swapping the sums gives ``sum_j C_j dr_j/dphi`` with
    ``C_j = sum_{t<=j} gamma^(j-t) (w . psi_t)``; memory is linear in the batch.
    """
    batch = as_batch(batch)
    C = batch.forward_discounted(score_dot(policy, batch, w), disc.gamma)
    X = batch.X
    return np.concatenate([X.T @ C, X.T @ (C * batch.r_p), X.T @ (C * batch.r_aux)]) / batch.size


def contract_varphi(policy, batch, reward_model, disc, w, mode=NO_REGULARIZER):
    """``w . B`` where B differentiates ``gamma^(j-t)`` with respect to varphi.

    ``d gamma^k / d varphi = k gamma^(k-1) gamma (1 - gamma)``. With
    ``D_j = sum_{t<j} (j-t) gamma^(j-t-1) (w . psi_t)`` the contraction is
    ``gamma (1 - gamma) mean sum_j D_j r_j``, and ``D_j = gamma D_{j-1} + C_{j-1}``.
    """
    batch = as_batch(batch)
    gamma = disc.gamma
    C = batch.forward_discounted(score_dot(policy, batch, w), gamma)
    shifted = np.zeros_like(C)
    shifted[1:] = C[:-1]
    shifted[batch.starts] = 0.0
    D = batch.forward_discounted(shifted, gamma)
    r = alignment_rewards(batch, reward_model)
    if mode.kind == "entropy" and mode.strength > 0:
        r = r - mode.strength * step_log_probs(policy, batch)
    return disc.dgamma * float(D @ r) / batch.size


@dataclass
class OuterStep:
    phi: np.ndarray
    varphi: float
    J: float
    v_norm: float


def outer_gradients(policy, reward_model, disc, d_off, d_on, cfg, lambda_phi, lambda_gamma,
                    problem_gamma, mode=NO_REGULARIZER, v=None):
    """Ascent directions for phi and varphi sharing one Neumann solve.

    ``policy`` holds theta*, ``d_off`` defines H and the contractions,
    ``d_on`` (collected under theta*) gives ``v = dJ/dtheta``. Passing ``v``
    skips the on-policy estimate.
    """
    d_off = as_batch(d_off)
    if v is None:
        J, v = outer_objective_grad(policy, d_on, problem_gamma)
    else:
        J = float("nan")
    v = np.asarray(v, dtype=np.float64)
    reg_phi = lambda_phi * reward_model.phi
    reg_varphi = lambda_gamma * disc.dgamma
    if not np.any(v):
        return OuterStep(-reg_phi, -reg_varphi, J, 0.0)
    update = make_update_fn(policy, d_off, reward_model, disc, mode)
    theta = policy.theta.copy()
    w = neumann_vhinv(v, lambda u: -hvp(update, theta, u), cfg)
    phi_dir = contract_phi(policy, d_off, disc, w) - reg_phi
    varphi_dir = contract_varphi(policy, d_off, reward_model, disc, w, mode) - reg_varphi
    return OuterStep(phi_dir, varphi_dir, J, float(np.linalg.norm(v)))


def phi_update(policy, reward_model, disc, d_off, d_on, cfg, lambda_phi, problem_gamma,
               mode=NO_REGULARIZER, v=None):
    return outer_gradients(policy, reward_model, disc, d_off, d_on, cfg, lambda_phi, 0.0,
                           problem_gamma, mode, v).phi


def varphi_update(policy, reward_model, disc, d_off, d_on, cfg, lambda_gamma, problem_gamma,
                  mode=NO_REGULARIZER, v=None):
    return outer_gradients(policy, reward_model, disc, d_off, d_on, cfg, 0.0, lambda_gamma,
                           problem_gamma, mode, v).varphi
