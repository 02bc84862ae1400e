"""Behavior-alignment reward r_phi and the sigmoid-parameterized discount."""
import numpy as np

from .errors import DimensionError


class AlignmentReward:
    """Three linear heads combined as ``h1(s) + h2(s) * r_p + h3(s) * r_aux``.

    ``phi`` is the concatenation ``(w1, w2, w3)``, each block ``feature_dim``
    long, and ``h_k(s) = w_k . x(s)``.
    """

    def __init__(self, feature_dim, phi=None):
        self.feature_dim = int(feature_dim)
        if phi is None:
            phi = np.zeros(3 * self.feature_dim)
        phi = np.asarray(phi, dtype=np.float64)
        if phi.shape != (3 * self.feature_dim,):
            raise DimensionError(f"phi must have length {3 * self.feature_dim}, got {phi.shape}")
        self.phi = phi

    @classmethod
    def pass_through(cls, feature_dim, constant_weights, aux_weight=0.0):
        """Start at ``r_p + aux_weight * r_aux``.

        ``constant_weights`` is any ``w`` with ``w . x(s) == 1`` for every state,
        e.g. a unit vector on a Fourier basis' constant entry, or
        ``1 / tilings`` everywhere for a tile coder.
        """
        w = np.asarray(constant_weights, dtype=np.float64)
        phi = np.concatenate([np.zeros(feature_dim), w, aux_weight * w])
        return cls(feature_dim, phi)

    @property
    def size(self):
        return self.phi.size

    def heads(self, features, phi=None):
        """Per-state head outputs, shape ``(..., 3)``."""
        p = self.phi if phi is None else phi
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.feature_dim:
            raise DimensionError(f"features have length {x.shape[-1]}, reward expects {self.feature_dim}")
        return x @ p.reshape(3, self.feature_dim).T

    def value(self, features, r_p, r_aux, phi=None):
        h = self.heads(features, phi)
        return h[..., 0] + h[..., 1] * r_p + h[..., 2] * r_aux

    def grad(self, features, r_p, r_aux):
        x = np.asarray(features, dtype=np.float64)
        if x.shape != (self.feature_dim,):
            raise DimensionError(f"features must have length {self.feature_dim}")
        return np.concatenate([x, r_p * x, r_aux * x])


_BELOW_ONE = np.nextafter(1.0, 0.0)


def sigmoid(z):
    # clipped so the discount never rounds to exactly 0 or 1
    return np.clip(0.5 * (1.0 + np.tanh(0.5 * z)), 1e-300, _BELOW_ONE)


class LearnedDiscount:
    """gamma = sigmoid(varphi), strictly inside (0, 1)."""

    def __init__(self, varphi=4.6):
        self.varphi = float(varphi)

    @property
    def gamma(self):
        return float(sigmoid(self.varphi))

    @property
    def dgamma(self):
        g = self.gamma
        return g * (1.0 - g)


def reward_eval(model, features, r_p, r_aux):
    return float(model.value(features, r_p, r_aux))


def reward_grad(model, features, r_p, r_aux):
    return model.grad(features, r_p, r_aux)


def gamma_eval(disc):
    return disc.gamma


def gamma_grad(disc):
    return disc.dgamma
