"""Softmax policies that are linear in state features."""
import numpy as np

from .errors import DimensionError


def log_softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


class SoftmaxLinearPolicy:
    """pi(a | s) proportional to exp(theta_a . x(s)).

    ``theta`` is flat with one contiguous block of ``feature_dim`` weights per
    action, so ``theta.reshape(num_actions, feature_dim)`` recovers the blocks.
    """

    def __init__(self, feature_dim, num_actions, theta=None):
        self.feature_dim = int(feature_dim)
        self.num_actions = int(num_actions)
        size = self.feature_dim * self.num_actions
        if theta is None:
            theta = np.zeros(size)
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (size,):
            raise DimensionError(f"theta must have length {size}, got {theta.shape}")
        self.theta = theta

    @property
    def size(self):
        return self.theta.size

    def weights(self, theta=None):
        t = self.theta if theta is None else theta
        return t.reshape(self.num_actions, self.feature_dim)

    def _check(self, features):
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.feature_dim:
            raise DimensionError(f"features have length {x.shape[-1]}, policy expects {self.feature_dim}")
        return x

    def log_probs(self, features, theta=None):
        """Log action probabilities; works on a single vector or a (T, d) batch."""
        x = self._check(features)
        return log_softmax(x @ self.weights(theta).T)

    def action_probs(self, features, theta=None):
        return np.exp(self.log_probs(features, theta))

    def score(self, features, action, theta=None):
        """Gradient of ln pi(action | s) with respect to theta."""
        x = self._check(features)
        if not 0 <= action < self.num_actions:
            raise IndexError(f"action {action} out of range")
        coef = -self.action_probs(x, theta)
        coef[action] += 1.0
        return np.outer(coef, x).ravel()

    def sample_action(self, features, rng, theta=None):
        p = self.action_probs(features, theta)
        u = rng.random()
        cdf = np.cumsum(p)
        # searchsorted with side="right" picks the lowest index whose cdf exceeds u
        return int(min(np.searchsorted(cdf, u, side="right"), self.num_actions - 1))

    def entropy(self, features, theta=None):
        logp = self.log_probs(features, theta)
        return float(-np.sum(np.exp(logp) * logp))

    def copy(self):
        return SoftmaxLinearPolicy(self.feature_dim, self.num_actions, self.theta.copy())


def action_probs(policy, features):
    return policy.action_probs(features)


def score(policy, features, action):
    return policy.score(features, action)


def sample_action(policy, features, rng):
    return policy.sample_action(features, rng)


def entropy(policy, features):
    return policy.entropy(features)
