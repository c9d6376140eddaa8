"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument is non-finite, out of range, or otherwise unusable."""


class PoleError(InvalidArgumentError):
    """A function was evaluated at one of its poles (e.g. a Hankel function at 0)."""


class ContourZeroError(ArithmeticError):
    """The target function (nearly) vanishes on an integration contour."""


class ConvergenceError(RuntimeError):
    """An iterative procedure did not reach its tolerance."""


class ResonanceError(ArithmeticError):
    """A modal system is singular (denominator below its floor)."""


class DirichletEigenvalueError(ValueError):
    """k^2 n is (numerically) a Dirichlet eigenvalue of the unit disk."""


class NotFittedError(ValueError, AttributeError):
    """An estimator was used before ``fit``."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""
