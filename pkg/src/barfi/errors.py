"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Vector or matrix shapes do not line up."""


class NonFiniteError(FloatingPointError):
    """A NaN or Inf appeared where finite values are required."""


class EpisodeOverError(RuntimeError):
    """An action was submitted to an episode that has already ended."""


class NeumannDivergenceError(ArithmeticError):
    """The Neumann series iterates blew up; the scaling factor is too large."""


class EnumerationTooLargeError(ValueError):
    """Exact trajectory enumeration would exceed the configured guard."""


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""
