"""State featurizers: Fourier basis, tile coding and one-hot vectors."""
import itertools

import numpy as np

from .errors import DimensionError


def _as_bounds(bounds):
    b = np.asarray(bounds, dtype=np.float64)
    if b.ndim != 2 or b.shape[1] != 2:
        raise DimensionError("bounds must be a sequence of (low, high) pairs")
    if np.any(b[:, 1] <= b[:, 0]):
        raise ValueError("every bound needs high > low")
    return b


def _normalize(bounds, state):
    s = np.asarray(state, dtype=np.float64)
    if s.shape[-1] != bounds.shape[0]:
        raise DimensionError(f"state has {s.shape[-1]} dims, featurizer expects {bounds.shape[0]}")
    low, high = bounds[:, 0], bounds[:, 1]
    return np.clip((s - low) / (high - low), 0.0, 1.0)


class FourierBasis:
    """Full Fourier cosine basis of a given order over a box.

    Features are ``cos(pi * c . s_norm)`` for every integer coefficient vector
    ``c`` in ``{0..order}^d``, with the all-zero vector first so that entry 0
    is the constant feature. States outside ``bounds`` are clamped.
    """

    def __init__(self, order, bounds):
        if order < 0:
            raise ValueError("order must be non-negative")
        self.order = int(order)
        self.bounds = _as_bounds(bounds)
        self.input_dim = self.bounds.shape[0]
        self.coeffs = np.array(
            list(itertools.product(range(self.order + 1), repeat=self.input_dim)), dtype=np.float64
        )
        self.num_features = self.coeffs.shape[0]

    def __call__(self, state):
        return np.cos(np.pi * (_normalize(self.bounds, state) @ self.coeffs.T))


class TileCoder:
    """Grid tile coder with uniformly offset tilings.

    Tiling ``k`` is shifted by ``k / (tilings * tiles_per_dim)`` of the unit
    range along every dimension; cells that fall off the top are folded into
    the last tile so each tiling owns exactly ``tiles_per_dim ** d`` indices.
    """

    def __init__(self, tilings, tiles_per_dim, bounds):
        if tilings < 1 or tiles_per_dim < 1:
            raise ValueError("tilings and tiles_per_dim must be positive")
        self.tilings = int(tilings)
        self.tiles_per_dim = int(tiles_per_dim)
        self.bounds = _as_bounds(bounds)
        self.input_dim = self.bounds.shape[0]
        self.tiles_per_tiling = self.tiles_per_dim**self.input_dim
        self.num_features = self.tilings * self.tiles_per_tiling
        self._offsets = np.arange(self.tilings)[:, None] / self.tilings
        self._strides = self.tiles_per_dim ** np.arange(self.input_dim)

    def active(self, state):
        """Indices of the active tile in each tiling, ordered by tiling."""
        scaled = _normalize(self.bounds, state) * self.tiles_per_dim + self._offsets
        cells = np.minimum(np.floor(scaled).astype(np.int64), self.tiles_per_dim - 1)
        return np.arange(self.tilings) * self.tiles_per_tiling + cells @ self._strides

    def __call__(self, state):
        x = np.zeros(self.num_features)
        x[self.active(state)] = 1.0
        return x


def fourier_features(basis, state):
    return basis(state)


def tile_features(coder, state):
    return frozenset(int(i) for i in coder.active(state))


def onehot(n, i):
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for one-hot of size {n}")
    x = np.zeros(n)
    x[i] = 1.0
    return x
