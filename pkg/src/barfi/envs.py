"""Evaluation environments and their auxiliary reward catalog.

Environments are stateless objects: ``reset`` returns an :class:`EnvState`
and ``step(state, action)`` returns a :class:`StepOutcome` holding the next
state. Randomness only enters through the ``rng`` passed to ``reset``.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EpisodeOverError


class Aux(str, enum.Enum):
    GW_NEG_L2 = "GW_negL2"
    GW_CENTER_BONUS = "GW_centerBonus"
    GW_PARTIAL_MANHATTAN = "GW_partialManhattan"
    MC_ABS_VELOCITY = "MC_absVelocity"
    MC_ENERGY_PUMP = "MC_energyPump"
    CP_MATCH_PD = "CP_matchPD"
    CP_ANTI_PD = "CP_antiPD"
    BANDIT_NONE = "Bandit_none"


AUX_BY_ENV = {
    "gridworld": (Aux.GW_NEG_L2, Aux.GW_CENTER_BONUS, Aux.GW_PARTIAL_MANHATTAN),
    "mountaincar": (Aux.MC_ABS_VELOCITY, Aux.MC_ENERGY_PUMP),
    "cartpole": (Aux.CP_MATCH_PD, Aux.CP_ANTI_PD),
    "bandit": (Aux.BANDIT_NONE,),
}

# variants that depend on the state alone and so can serve as a shaping potential
STATE_ONLY_AUX = {Aux.GW_NEG_L2, Aux.GW_CENTER_BONUS, Aux.GW_PARTIAL_MANHATTAN, Aux.MC_ABS_VELOCITY}


@dataclass(frozen=True)
class EnvState:
    raw: np.ndarray
    step_count: int = 0
    terminal: bool = False


@dataclass(frozen=True)
class StepOutcome:
    next_state: EnvState
    r_p: float
    r_aux: float
    terminal: bool


def _check_aux(env, aux):
    aux = Aux(aux)
    if aux not in AUX_BY_ENV[env]:
        raise ValueError(f"aux variant {aux.value} does not belong to {env}")
    return aux


def _advance(state, raw, r_p, r_aux, done, horizon):
    steps = state.step_count + 1
    done = bool(done or steps >= horizon)
    return StepOutcome(EnvState(raw, steps, done), float(r_p), float(r_aux), done)


def _require_live(state):
    if state.terminal:
        raise EpisodeOverError("episode already terminated; call reset()")


class GridWorld:
    """Deterministic 5x5 grid; start bottom-left, goal top-right.

    Actions: 0 up, 1 down, 2 left, 3 right. Bumping a wall leaves the agent in
    place. Reaching the goal pays 100 and ends the episode.
    """

    name = "gridworld"
    num_actions = 4
    MOVES = ((0, 1), (0, -1), (-1, 0), (1, 0))

    def __init__(self, aux=Aux.GW_CENTER_BONUS, size=5, horizon=100):
        self.aux = _check_aux(self.name, aux)
        self.size = size
        self.horizon = horizon
        self.start = (0, 0)
        self.goal = (size - 1, size - 1)
        self.center = (size // 2, size // 2)
        self.obs_bounds = [(0.0, size - 1.0)] * 2

    def reset(self, rng=None):
        return EnvState(np.array(self.start, dtype=np.float64))

    def manhattan_to_goal(self, cell):
        return abs(self.goal[0] - cell[0]) + abs(self.goal[1] - cell[1])

    def potential(self, raw):
        """The state-only auxiliary signal evaluated at a cell."""
        cell = (int(raw[0]), int(raw[1]))
        if self.aux is Aux.GW_NEG_L2:
            return -float((cell[0] - self.goal[0]) ** 2 + (cell[1] - self.goal[1]) ** 2)
        if self.aux is Aux.GW_CENTER_BONUS:
            return 50.0 if cell == self.center else 0.0
        # start-side half pays +distance, goal-side half pays -distance
        d = self.manhattan_to_goal(cell)
        return float(d) if cell[0] + cell[1] < self.size - 1 else -float(d)

    def aux_reward(self, raw, action, next_raw):
        return self.potential(next_raw)

    def step(self, state, action, rng=None):
        _require_live(state)
        dx, dy = self.MOVES[action]
        x = min(max(int(state.raw[0]) + dx, 0), self.size - 1)
        y = min(max(int(state.raw[1]) + dy, 0), self.size - 1)
        nxt = np.array((x, y), dtype=np.float64)
        at_goal = (x, y) == self.goal
        r_aux = self.aux_reward(state.raw, action, nxt)
        return _advance(state, nxt, 100.0 if at_goal else 0.0, r_aux, at_goal, self.horizon)


class MountainCar:
    """Sparse-reward mountain car: +1 on reaching x >= 0.5, else 0.

    Actions: 0 push left, 1 no push, 2 push right.
    """

    name = "mountaincar"
    num_actions = 3
    X_BOUNDS = (-1.2, 0.6)
    V_BOUNDS = (-0.07, 0.07)
    GOAL_X = 0.5

    def __init__(self, aux=Aux.MC_ENERGY_PUMP, horizon=1000):
        self.aux = _check_aux(self.name, aux)
        self.horizon = horizon
        self.obs_bounds = [self.X_BOUNDS, self.V_BOUNDS]

    def reset(self, rng):
        return EnvState(np.array((rng.uniform(-0.6, -0.4), 0.0)))

    def potential(self, raw):
        return abs(float(raw[1]))

    def aux_reward(self, raw, action, next_raw):
        v = float(raw[1])
        if self.aux is Aux.MC_ABS_VELOCITY:
            return abs(v)
        direction = action - 1
        return 1.0 if (v > 0) - (v < 0) == direction else 0.0

    def step(self, state, action, rng=None):
        _require_live(state)
        x, v = float(state.raw[0]), float(state.raw[1])
        v = min(max(v + 0.001 * (action - 1) - 0.0025 * math.cos(3.0 * x), self.V_BOUNDS[0]), self.V_BOUNDS[1])
        x = min(max(x + v, self.X_BOUNDS[0]), self.X_BOUNDS[1])
        if x == self.X_BOUNDS[0] and v < 0:
            v = 0.0
        nxt = np.array((x, v))
        done = x >= self.GOAL_X
        r_aux = self.aux_reward(state.raw, action, nxt)
        return _advance(state, nxt, 1.0 if done else 0.0, r_aux, done, self.horizon)


# bang-bang gains found by grid search over (kp, kd); see tests/test_envs.py
PD_GAINS = (1.0, 0.5)


def pd_controller(raw, gains=PD_GAINS):
    """Push right (1) iff kp * angle + kd * angular_velocity > 0, else left."""
    kp, kd = gains
    return 1 if kp * raw[2] + kd * raw[3] > 0 else 0


class CartPole:
    """Classic cart-pole balancing with Euler integration.

    Observation is (cart position, cart velocity, pole angle, pole angular
    velocity). Every step pays +1; the episode ends when the pole passes 12
    degrees, the cart leaves [-2.4, 2.4], or after ``horizon`` steps.
    """

    name = "cartpole"
    num_actions = 2
    GRAVITY = 9.8
    MASS_CART = 1.0
    MASS_POLE = 0.1
    HALF_LENGTH = 0.5
    FORCE = 10.0
    TAU = 0.02
    X_LIMIT = 2.4
    ANGLE_LIMIT = 12 * 2 * math.pi / 360

    def __init__(self, aux=Aux.CP_MATCH_PD, horizon=500, pd_gains=PD_GAINS):
        self.aux = _check_aux(self.name, aux)
        self.horizon = horizon
        self.pd_gains = pd_gains
        self.obs_bounds = [(-2.4, 2.4), (-3.0, 3.0), (-self.ANGLE_LIMIT, self.ANGLE_LIMIT), (-3.5, 3.5)]

    def reset(self, rng):
        return EnvState(rng.uniform(-0.05, 0.05, size=4))

    def aux_reward(self, raw, action, next_raw):
        match = 5.0 if pd_controller(raw, self.pd_gains) == action else -1.0
        return match if self.aux is Aux.CP_MATCH_PD else -match

    def step(self, state, action, rng=None):
        _require_live(state)
        x, x_dot, theta, theta_dot = (float(u) for u in state.raw)
        force = self.FORCE if action == 1 else -self.FORCE
        cos, sin = math.cos(theta), math.sin(theta)
        total_mass = self.MASS_CART + self.MASS_POLE
        pm_l = self.MASS_POLE * self.HALF_LENGTH
        temp = (force + pm_l * theta_dot**2 * sin) / total_mass
        theta_acc = (self.GRAVITY * sin - cos * temp) / (
            self.HALF_LENGTH * (4.0 / 3.0 - self.MASS_POLE * cos**2 / total_mass)
        )
        x_acc = temp - pm_l * theta_acc * cos / total_mass
        x += self.TAU * x_dot
        x_dot += self.TAU * x_acc
        theta += self.TAU * theta_dot
        theta_dot += self.TAU * theta_acc
        nxt = np.array((x, x_dot, theta, theta_dot))
        failed = abs(x) > self.X_LIMIT or abs(theta) > self.ANGLE_LIMIT
        r_aux = self.aux_reward(state.raw, action, nxt)
        return _advance(state, nxt, 1.0, r_aux, failed, self.horizon)


BANDIT_REWARDS = (0.2, 0.5, 1.0)


class Bandit:
    """Single state, three arms (A, B, C), one step per episode."""

    name = "bandit"
    num_actions = 3

    def __init__(self, aux=Aux.BANDIT_NONE, rewards=BANDIT_REWARDS):
        self.aux = _check_aux(self.name, aux)
        self.rewards = tuple(float(r) for r in rewards)
        self.horizon = 1
        self.obs_bounds = [(0.0, 1.0)]

    def reset(self, rng=None):
        return EnvState(np.zeros(1))

    def aux_reward(self, raw, action, next_raw):
        return 0.0

    def step(self, state, action, rng=None):
        _require_live(state)
        return _advance(state, state.raw, self.rewards[action], 0.0, True, 1)


ENVIRONMENTS = {"gridworld": GridWorld, "mountaincar": MountainCar, "cartpole": CartPole, "bandit": Bandit}


def make_env(name, aux, **kwargs):
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}") from None
    return cls(aux, **kwargs)


_DEFAULTS = {}


def _default(cls, aux):
    key = (cls, Aux(aux))
    if key not in _DEFAULTS:
        _DEFAULTS[key] = cls(aux)
    return _DEFAULTS[key]


def gridworld_step(state, action, aux, rng=None):
    return _default(GridWorld, aux).step(state, action, rng)


def mountaincar_step(state, action, aux, rng=None):
    return _default(MountainCar, aux).step(state, action, rng)


def cartpole_step(state, action, aux, rng=None):
    return _default(CartPole, aux).step(state, action, rng)


def bandit_step(action, state=None):
    env = _default(Bandit, Aux.BANDIT_NONE)
    return env.step(env.reset() if state is None else state, action)
