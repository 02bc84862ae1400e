"""Inner policy optimization: return estimators, replay and the update loop.

All estimators average over trajectories and sum over time steps, in the
"gamma-dropped" form used by most policy-gradient code::

    delta = mean_tau sum_t psi(S_t, A_t) * sum_{j>=t} gamma^(j-t) r(S_j, A_j)
"""
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DimensionError


@dataclass
class Trajectory:
    """One episode, stored column-wise."""

    features: np.ndarray
    actions: np.ndarray
    r_p: np.ndarray
    r_aux: np.ndarray
    behavior_logprob: np.ndarray
    terminal: bool = True

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.actions = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        self.r_p = np.asarray(self.r_p, dtype=np.float64).reshape(-1)
        self.r_aux = np.asarray(self.r_aux, dtype=np.float64).reshape(-1)
        self.behavior_logprob = np.asarray(self.behavior_logprob, dtype=np.float64).reshape(-1)
        n = self.actions.size
        if n < 1:
            raise ValueError("a trajectory needs at least one step")
        if any(len(a) != n for a in (self.features, self.r_p, self.r_aux, self.behavior_logprob)):
            raise DimensionError("trajectory columns have different lengths")

    def __len__(self):
        return self.actions.size


class Batch:
    """Several trajectories stacked into flat per-step arrays."""

    def __init__(self, trajectories):
        trajectories = list(trajectories)
        if not trajectories:
            raise ValueError("batch is empty")
        self.trajectories = trajectories
        self.size = len(trajectories)
        self.lengths = np.array([len(t) for t in trajectories])
        self.starts = np.concatenate([[0], np.cumsum(self.lengths)[:-1]])
        self.X = np.concatenate([t.features for t in trajectories])
        self.actions = np.concatenate([t.actions for t in trajectories])
        self.r_p = np.concatenate([t.r_p for t in trajectories])
        self.r_aux = np.concatenate([t.r_aux for t in trajectories])
        # (trajectory, time) coordinates of every step in a padded matrix
        self._rows = np.repeat(np.arange(self.size), self.lengths)
        self._cols = np.arange(len(self.actions)) - np.repeat(self.starts, self.lengths)
        self._width = int(self.lengths.max())

    def __len__(self):
        return self.actions.size

    def segments(self):
        for s, n in zip(self.starts, self.lengths):
            yield slice(s, s + n)

    def _padded(self, values):
        M = np.zeros((self.size, self._width))
        M[self._rows, self._cols] = values
        return M

    def returns(self, rewards, gamma):
        """Reward-to-go within each trajectory."""
        # zero padding sits after each episode, so it never leaks into the sums
        M = self._padded(rewards)[:, ::-1]
        return lfilter([1.0], [1.0, -gamma], M, axis=1)[:, ::-1][self._rows, self._cols]

    def forward_discounted(self, values, gamma):
        """``C_j = sum_{t<=j} gamma^(j-t) values_t`` within each trajectory."""
        return lfilter([1.0], [1.0, -gamma], self._padded(values), axis=1)[self._rows, self._cols]


def as_batch(batch):
    return batch if isinstance(batch, Batch) else Batch(batch)


def discounted_returns(rewards, gamma):
    """``G_t = r_t + gamma * G_{t+1}`` evaluated right to left."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.size == 0:
        return r.copy()
    return lfilter([1.0], [1.0, -gamma], r[::-1])[::-1]


def score_weighted_sum(policy, batch, weights, theta=None):
    """``sum_t weights_t * psi(S_t, A_t)`` over every step of the batch."""
    probs = policy.action_probs(batch.X, theta)
    coef = -probs
    coef[np.arange(len(batch)), batch.actions] += 1.0
    return ((coef * weights[:, None]).T @ batch.X).ravel()


def score_dot(policy, batch, w, theta=None):
    """``w . psi(S_t, A_t)`` for every step, without forming psi."""
    logits_w = batch.X @ policy.weights(w).T
    probs = policy.action_probs(batch.X, theta)
    return logits_w[np.arange(len(batch)), batch.actions] - np.sum(probs * logits_w, axis=1)


def step_log_probs(policy, batch, theta=None):
    return policy.log_probs(batch.X, theta)[np.arange(len(batch)), batch.actions]


def alignment_rewards(batch, reward_model):
    return reward_model.value(batch.X, batch.r_p, batch.r_aux)


@dataclass(frozen=True)
class InnerRegularizer:
    """``l2``: subtract ``strength * theta`` from the update.
    ``entropy``: replace r by ``r - strength * ln pi(S, A)`` inside returns.
    """

    kind: str = "l2"
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l2", "entropy"):
            raise ValueError(f"unknown regularizer {self.kind!r}")
        if self.strength < 0:
            raise ValueError("regularizer strength must be non-negative")


NO_REGULARIZER = InnerRegularizer("l2", 0.0)


def inner_objective(policy, batch, reward_model, disc, theta=None):
    """``mean_tau sum_t ln pi(S_t, A_t) * G_t`` with G from r_phi and gamma_phi."""
    batch = as_batch(batch)
    G = batch.returns(alignment_rewards(batch, reward_model), disc.gamma)
    return float(step_log_probs(policy, batch, theta) @ G) / batch.size


def inner_update_estimate(policy, batch, reward_model, disc, theta=None):
    """Replay estimate of the update; no importance weights are applied."""
    batch = as_batch(batch)
    G = batch.returns(alignment_rewards(batch, reward_model), disc.gamma)
    return score_weighted_sum(policy, batch, G, theta) / batch.size


def regularized_update(raw, policy, batch, mode, gamma, theta=None):
    """Add the regularizer's contribution to a raw update estimate."""
    if mode.strength == 0.0:
        return raw
    t = policy.theta if theta is None else theta
    if mode.kind == "l2":
        return raw - mode.strength * t
    batch = as_batch(batch)
    bonus = -mode.strength * step_log_probs(policy, batch, t)
    return raw + score_weighted_sum(policy, batch, batch.returns(bonus, gamma), t) / batch.size


def make_update_fn(policy, batch, reward_model, disc, mode=NO_REGULARIZER):
    """Return ``theta -> regularized update`` with the reward-to-go cached."""
    batch = as_batch(batch)
    gamma = disc.gamma
    G = batch.returns(alignment_rewards(batch, reward_model), gamma)

    def update(theta):
        raw = score_weighted_sum(policy, batch, G, theta) / batch.size
        return regularized_update(raw, policy, batch, mode, gamma, theta)

    return update


def outer_objective_grad(policy, batch, gamma):
    """Objective J on r_p with the problem discount, and its theta-gradient."""
    batch = as_batch(batch)
    G = batch.returns(batch.r_p, gamma)
    J = float(step_log_probs(policy, batch) @ G) / batch.size
    return J, score_weighted_sum(policy, batch, G) / batch.size


class ReplayBuffer:
    """FIFO store of trajectories; the oldest are evicted first."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self._items = deque(maxlen=self.capacity)
        self.batches_drawn = 0

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def append(self, trajectory):
        self._items.append(trajectory)

    def extend(self, trajectories):
        self._items.extend(trajectories)

    def sample(self, rng, batch_size=1):
        """Uniform sample with replacement."""
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(len(self._items), size=batch_size)
        self.batches_drawn += 1
        return Batch([self._items[i] for i in idx])

    def subsample(self, rng, max_trajectories):
        """All stored trajectories, or a uniform subset without replacement."""
        if max_trajectories <= 0 or max_trajectories >= len(self._items):
            return Batch(list(self._items))
        idx = np.sort(rng.choice(len(self._items), size=max_trajectories, replace=False))
        return Batch([self._items[i] for i in idx])


def inner_converge(policy, buffer, reward_model, disc, steps, optimizer, mode, rng, batch_size=1):
    """Run ``steps`` optimizer updates on replayed batches; no new episodes."""
    if len(buffer) == 0:
        raise ValueError("replay buffer is empty")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    gamma = disc.gamma
    for _ in range(steps):
        batch = buffer.sample(rng, batch_size)
        raw = inner_update_estimate(policy, batch, reward_model, disc)
        policy.theta = optimizer.step(policy.theta, regularized_update(raw, policy, batch, mode, gamma))
    return policy
