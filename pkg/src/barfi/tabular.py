"""Exact computations on small finite-horizon MDPs.

Expectations of sample policy-gradient updates are computed by enumerating
every trajectory with nonzero probability. Policies are softmax over one-hot
state features, so ``theta`` has the same layout as :class:`SoftmaxLinearPolicy`.

Time is explicit throughout: ``horizon`` is the number of decisions, and
reward tables may depend on (t, s, a, s'). An episode ends after ``horizon``
decisions or on entering a terminal state.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationTooLargeError
from .policy import SoftmaxLinearPolicy

MAX_TRAJECTORIES = 10**6
WEIGHTINGS = ("dropped", "gamma_t", "offpolicy_full_IS", "offpolicy_none")


def _check_distribution(p, axis, what, tol=1e-12):
    if np.any(p < 0) or not np.allclose(p.sum(axis=axis), 1.0, atol=tol, rtol=0):
        raise ValueError(f"{what} must be a probability distribution")


@dataclass
class TabularMDP:
    transition: np.ndarray  # (S, A, S')
    r_p: np.ndarray  # (S, A)
    d0: np.ndarray
    horizon: int
    terminal: frozenset = frozenset()
    r_aux: np.ndarray = None

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=np.float64)
        S, A, S2 = self.transition.shape
        if S2 != S:
            raise ValueError("transition must have shape (S, A, S)")
        _check_distribution(self.transition, 2, "each transition row")
        self.d0 = np.asarray(self.d0, dtype=np.float64)
        _check_distribution(self.d0, 0, "d0")
        self.r_p = np.asarray(self.r_p, dtype=np.float64)
        if self.r_aux is None:
            self.r_aux = np.zeros((S, A))
        if self.horizon < 1:
            raise ValueError("horizon must be at least one decision")
        self.terminal = frozenset(int(s) for s in self.terminal)
        self.nonterminal = np.array([s not in self.terminal for s in range(S)])

    @property
    def num_states(self):
        return self.transition.shape[0]

    @property
    def num_actions(self):
        return self.transition.shape[1]

    def policy(self, theta=None):
        return SoftmaxLinearPolicy(self.num_states, self.num_actions, theta)

    def policy_table(self, theta):
        return self.policy(theta).action_probs(np.eye(self.num_states))

    def reward_table(self, reward):
        """Broadcast an (S,A), (H,S,A) or (H,S,A,S') table to (H,S,A,S')."""
        r = np.asarray(reward, dtype=np.float64)
        if r.ndim == 2:
            r = r[None, :, :, None]
        elif r.ndim == 3:
            r = r[..., None]
        shape = (self.horizon, self.num_states, self.num_actions, self.num_states)
        return np.broadcast_to(r, shape)


def shaped_reward(mdp, potential, gamma, base=None):
    """``r + gamma Phi(s') - Phi(s)`` with Phi = 0 once the episode has ended."""
    phi = np.asarray(potential, dtype=np.float64)
    base = mdp.reward_table(mdp.r_p if base is None else base)
    nxt = np.broadcast_to(phi * mdp.nonterminal, (mdp.horizon, mdp.num_states)).copy()
    nxt[-1] = 0.0
    return base + gamma * nxt[:, None, None, :] - phi[None, :, None, None]


@dataclass
class VisitationResult:
    d_gamma: np.ndarray
    d_bar: np.ndarray
    d_norm: np.ndarray
    by_time: np.ndarray = field(repr=False)  # (H, S, A) occupancy at each step


def visitation(mdp, policy_table, gamma):
    pi = np.asarray(policy_table, dtype=np.float64)
    _check_distribution(pi, 1, "policy rows")
    occ = np.zeros((mdp.horizon, mdp.num_states, mdp.num_actions))
    state = mdp.d0 * mdp.nonterminal
    for t in range(mdp.horizon):
        occ[t] = state[:, None] * pi
        state = np.einsum("sa,sap->p", occ[t], mdp.transition) * mdp.nonterminal
    weights = gamma ** np.arange(mdp.horizon)
    d_gamma = np.tensordot(weights, occ, axes=1)
    d_bar = occ.sum(axis=0)
    return VisitationResult(d_gamma, d_bar, d_bar / d_bar.sum(), occ)


def qvalues(mdp, policy_table, gamma, reward=None):
    """Time-indexed action values ``q[t, s, a]`` by backward induction."""
    pi = np.asarray(policy_table, dtype=np.float64)
    R = mdp.reward_table(mdp.r_p if reward is None else reward)
    q = np.zeros((mdp.horizon, mdp.num_states, mdp.num_actions))
    value = np.zeros(mdp.num_states)
    for t in reversed(range(mdp.horizon)):
        cont = gamma * value * mdp.nonterminal
        q[t] = np.einsum("sap,sap->sa", mdp.transition, R[t] + cont[None, None, :])
        value = np.sum(pi * q[t], axis=1)
    return q


@dataclass
class Enumeration:
    """Every trajectory, padded to the horizon; ``alive[n, t]`` marks real steps."""

    prob: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    alive: np.ndarray


def enumerate_trajectories(mdp, policy_table, limit=MAX_TRAJECTORIES):
    S, A, H = mdp.num_states, mdp.num_actions, mdp.horizon
    bound = S * float(A * S) ** H
    if bound > limit:
        raise EnumerationTooLargeError(f"up to {bound:.3g} trajectories exceeds the limit of {limit}")
    pi = np.asarray(policy_table, dtype=np.float64)
    prob = mdp.d0.copy()
    states = np.arange(S)[:, None]
    actions = np.zeros((S, 0), dtype=np.int64)
    nexts = np.zeros((S, 0), dtype=np.int64)
    alive = np.zeros((S, 0), dtype=bool)
    live = mdp.nonterminal[np.arange(S)]
    for t in range(H):
        s = states[:, -1]
        # live prefixes branch over (a, s'); finished ones carry a single padded step
        branch = pi[s][:, :, None] * mdp.transition[s]
        grow = np.where((live & (prob > 0))[:, None, None], branch, 0.0)
        idx, a, s2 = np.nonzero(grow > 0)
        done_idx = np.flatnonzero(~live & (prob > 0))
        order = np.concatenate([idx, done_idx])
        new_prob = np.concatenate([prob[idx] * grow[idx, a, s2], prob[done_idx]])
        pad = np.zeros(done_idx.size, dtype=np.int64)
        a = np.concatenate([a, pad])
        s2 = np.concatenate([s2, states[done_idx, -1]])
        step_alive = np.concatenate([np.ones(idx.size, dtype=bool), np.zeros(done_idx.size, dtype=bool)])
        states = np.column_stack([states[order], s2])
        actions = np.column_stack([actions[order], a])
        nexts = np.column_stack([nexts[order], s2])
        alive = np.column_stack([alive[order], step_alive])
        live = step_alive & mdp.nonterminal[s2]
        prob = new_prob
    return Enumeration(prob, states[:, :-1], actions, nexts, alive)


def trajectory_updates(mdp, theta, reward, gamma, weighting="dropped", behavior=None):
    """Per-trajectory sample updates and their probabilities.

    ``dropped``         sum_t psi_t sum_{j>=t} gamma^(j-t) r_j, sampled under pi
    ``gamma_t``         sum_t gamma^t psi_t sum_{j>=t} gamma^(j-t) r_j, under pi
    ``offpolicy_full_IS`` as gamma_t with r_j scaled by rho_{0:j}, sampled under beta
    ``offpolicy_none``  as dropped but sampled under beta
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}")
    pi = mdp.policy_table(theta)
    off = weighting.startswith("offpolicy")
    if off:
        if behavior is None:
            raise ValueError(f"{weighting} needs a behavior policy table")
        beta = np.asarray(behavior, dtype=np.float64)
        _check_distribution(beta, 1, "behavior rows")
        if np.any((beta == 0) & (pi > 0)):
            raise ValueError("behavior policy must cover every action the target policy takes")
    else:
        beta = pi
    traj = enumerate_trajectories(mdp, beta)
    H = mdp.horizon
    t_idx = np.arange(H)
    r = mdp.reward_table(reward)[t_idx, traj.states, traj.actions, traj.next_states] * traj.alive
    if weighting == "offpolicy_full_IS":
        ratio = np.where(traj.alive, pi[traj.states, traj.actions] / beta[traj.states, traj.actions], 1.0)
        r = r * np.cumprod(ratio, axis=1)
    G = np.zeros_like(r)
    acc = np.zeros(r.shape[0])
    for t in reversed(range(H)):
        acc = r[:, t] + gamma * acc
        G[:, t] = acc
    if weighting in ("gamma_t", "offpolicy_full_IS"):
        G = G * gamma**t_idx
    G = G * traj.alive
    N, A, S = G.shape[0], mdp.num_actions, mdp.num_states
    U = np.zeros((N, A, S))
    rows = np.arange(N)
    for t in range(H):
        s, a = traj.states[:, t], traj.actions[:, t]
        coef = -pi[s]
        coef[rows, a] += 1.0
        U[rows, :, s] += G[:, t, None] * coef
    return U.reshape(N, A * S), traj.prob


def exact_expected_update(mdp, theta, reward, gamma, weighting="dropped", behavior=None):
    U, prob = trajectory_updates(mdp, theta, reward, gamma, weighting, behavior)
    return prob @ U


def update_variance(mdp, theta, reward, gamma, weighting="dropped", behavior=None):
    """Total variance (trace of the covariance) of the sample update."""
    U, prob = trajectory_updates(mdp, theta, reward, gamma, weighting, behavior)
    mean = prob @ U
    return float(prob @ np.sum(U * U, axis=1) - mean @ mean)


@dataclass
class PropReport:
    name: str
    max_error: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.max_error <= self.tolerance)

    def line(self):
        extra = "".join(f" {k}={v:.6g}" for k, v in self.details.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: max_error={self.max_error:.3g} (tol {self.tolerance:g}){extra}"


def prop1_check(mdp, theta, potential, gamma, tol=1e-10):
    """Potential shaping leaves the expected update unchanged; variance may grow."""
    shaped = shaped_reward(mdp, potential, gamma)
    e_shaped = exact_expected_update(mdp, theta, shaped, gamma)
    e_primary = exact_expected_update(mdp, theta, mdp.r_p, gamma)
    return PropReport(
        "prop1",
        float(np.max(np.abs(e_shaped - e_primary))),
        tol,
        {
            "var_shaped": update_variance(mdp, theta, shaped, gamma),
            "var_primary": update_variance(mdp, theta, mdp.r_p, gamma),
        },
    )


def one_step_variance_gap(mdp, theta, potential):
    """``Var(shaped) - Var(primary)`` for a single-decision MDP in closed form.

    With one decision the shaped reward is ``r_p - Phi(s)``, the means agree,
    and the gap is ``E[|psi|^2 (Phi^2 - 2 Phi r_p)]``.
    """
    if mdp.horizon != 1:
        raise ValueError("closed form needs a one-step horizon")
    pi = mdp.policy_table(theta)
    phi = np.asarray(potential, dtype=np.float64)[:, None]
    # |psi(s, a)|^2 = |e_a - pi(s)|^2 for one-hot state features
    psi_sq = 1.0 - 2.0 * pi + np.sum(pi * pi, axis=1, keepdims=True)
    weight = mdp.d0[:, None] * pi * mdp.nonterminal[:, None]
    return float(np.sum(weight * psi_sq * (phi**2 - 2.0 * phi * mdp.r_p)))


def constructed_reward(mdp, target_table, gamma, denominator_table):
    """``sum_t gamma^t Pr_t(s,a) q_t(s,a) / d_bar(s,a)`` with d_bar from the denominator policy.

    For time-homogeneous q this is ``q d_gamma / d_bar``; zero where d_bar is zero.
    """
    vis = visitation(mdp, target_table, gamma)
    q = qvalues(mdp, target_table, gamma)
    num = np.tensordot(gamma ** np.arange(mdp.horizon), vis.by_time * q, axes=1)
    d_bar = visitation(mdp, denominator_table, 1.0).d_bar
    return np.divide(num, d_bar, out=np.zeros_like(num), where=d_bar > 0)


def prop2_construct_and_check(mdp, theta, gamma, tol=1e-8):
    pi = mdp.policy_table(theta)
    r_phi = constructed_reward(mdp, pi, gamma, pi)
    lhs = exact_expected_update(mdp, theta, r_phi, 0.0, "dropped")
    rhs = exact_expected_update(mdp, theta, mdp.r_p, gamma, "gamma_t")
    return PropReport("prop2", float(np.max(np.abs(lhs - rhs))), tol)


def prop3_construct_and_check(mdp, theta, behavior, gamma, tol=1e-8):
    pi = mdp.policy_table(theta)
    beta = np.asarray(behavior, dtype=np.float64)
    if np.any((beta == 0) & (pi > 0)):
        raise ValueError("behavior policy needs full support where the target acts")
    r_phi = constructed_reward(mdp, pi, gamma, beta)
    lhs = exact_expected_update(mdp, theta, r_phi, 0.0, "offpolicy_none", beta)
    rhs = exact_expected_update(mdp, theta, mdp.r_p, gamma, "offpolicy_full_IS", beta)
    return PropReport("prop3", float(np.max(np.abs(lhs - rhs))), tol)


def random_mdp(rng, num_states=3, num_actions=2, horizon=3, terminal=True):
    """Dense random MDP; with ``terminal`` the last state absorbs and ends episodes."""
    P = rng.dirichlet(np.ones(num_states), size=(num_states, num_actions))
    term = {num_states - 1} if terminal else set()
    d0 = rng.dirichlet(np.ones(num_states - len(term)))
    d0 = np.concatenate([d0, np.zeros(len(term))])
    r_p = rng.normal(size=(num_states, num_actions))
    r_aux = rng.normal(size=(num_states, num_actions))
    return TabularMDP(P, r_p, d0, horizon, frozenset(term), r_aux)


def random_potential(rng, mdp, scale=1.0):
    return scale * rng.normal(size=mdp.num_states) * mdp.nonterminal


def bandit_mdp(rewards=(0.2, 0.5, 1.0)):
    r = np.asarray(rewards, dtype=np.float64)[None, :]
    P = np.ones((1, r.size, 1))
    return TabularMDP(P, r, np.ones(1), 1)


def check_all(seed=0, cases=20):
    """Run the three proposition checks on random instances; returns reports."""
    rng = np.random.default_rng(seed)
    reports = []
    worst = {"prop1": 0.0, "prop2": 0.0, "prop3": 0.0}
    for _ in range(cases):
        mdp = random_mdp(rng)
        theta = rng.normal(size=mdp.num_states * mdp.num_actions)
        gamma = rng.uniform(0.5, 0.99)
        beta = rng.dirichlet(np.ones(mdp.num_actions), size=mdp.num_states) * 0.9 + 0.1 / mdp.num_actions
        for rep in (
            prop1_check(mdp, theta, random_potential(rng, mdp), gamma),
            prop2_construct_and_check(mdp, theta, gamma),
            prop3_construct_and_check(mdp, theta, beta, gamma),
        ):
            worst[rep.name] = max(worst[rep.name], rep.max_error)
    for name, tol in (("prop1", 1e-10), ("prop2", 1e-8), ("prop3", 1e-8)):
        reports.append(PropReport(name, worst[name], tol, {"cases": cases}))
    return reports
