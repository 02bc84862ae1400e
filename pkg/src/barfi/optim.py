"""Flat parameter vectors and first-order optimizers.

Every optimizer here *ascends*: ``step`` returns ``params + update(grad)``.
Callers minimizing a loss pass the negated gradient.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NonFiniteError

OPTIMIZER_KINDS = ("sgd", "rmsprop", "adam")


def as_param_vector(values, name="params"):
    """Return ``values`` as a finite 1-d float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


def _check_pair(params, grad):
    params = as_param_vector(params, "params")
    grad = as_param_vector(grad, "grad")
    if params.shape != grad.shape:
        raise DimensionError(f"params has length {params.size} but grad has length {grad.size}")
    return params, grad


@dataclass
class OptimizerState:
    """Mutable optimizer state for one parameter vector.

    ``m`` and ``v`` are the first and second moment accumulators; SGD keeps
    them but never reads them. Constants follow the usual library defaults.
    """

    kind: str
    step_size: float
    size: int
    decay: float = 0.99
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    step_count: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer kind {self.kind!r}; expected one of {OPTIMIZER_KINDS}")
        if not self.step_size >= 0:
            raise ValueError("step_size must be non-negative")
        if self.size < 1:
            raise DimensionError("optimizer target must have at least one entry")
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)

    def step(self, params, grad):
        return _STEPS[self.kind](self, params, grad)


def make_optimizer(kind, step_size, size, **constants):
    return OptimizerState(kind=kind.lower(), step_size=float(step_size), size=int(size), **constants)


def _finish(state, params, update):
    out = params + update
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("optimizer produced non-finite parameters")
    state.step_count += 1
    return out


def _check_state(state, params):
    if state.size != params.size:
        raise DimensionError(f"optimizer sized for {state.size} entries, params have {params.size}")


def sgd_step(state, params, grad):
    params, grad = _check_pair(params, grad)
    _check_state(state, params)
    return _finish(state, params, state.step_size * grad)


def rmsprop_step(state, params, grad):
    params, grad = _check_pair(params, grad)
    _check_state(state, params)
    state.v = state.decay * state.v + (1.0 - state.decay) * grad * grad
    update = state.step_size * grad / (np.sqrt(state.v) + state.eps)
    return _finish(state, params, update)


def adam_step(state, params, grad):
    params, grad = _check_pair(params, grad)
    _check_state(state, params)
    b1, b2 = state.betas
    t = state.step_count + 1
    state.m = b1 * state.m + (1.0 - b1) * grad
    state.v = b2 * state.v + (1.0 - b2) * grad * grad
    m_hat = state.m / (1.0 - b1**t)
    v_hat = state.v / (1.0 - b2**t)
    update = state.step_size * m_hat / (np.sqrt(v_hat) + state.eps)
    return _finish(state, params, update)


_STEPS = {"sgd": sgd_step, "rmsprop": rmsprop_step, "adam": adam_step}
