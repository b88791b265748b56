"""Exception and warning types raised across the package."""
import numpy as np


class ThimcError(Exception):
    """Base class for all package errors."""


class InvariantError(ThimcError):
    """A value violates a structural invariant (det drift, Hermiticity, H=0, ...)."""


class PoleError(ThimcError):
    """A denominator vanishes on the grid.

    ``nodes`` holds the offending (i, j) indices (or sample indices for 1-d data).
    """

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = [tuple(int(k) for k in np.atleast_1d(n)) for n in nodes]


class DegenerateError(ThimcError):
    """The construction produces a degenerate metric or immersion."""


class SignConditionError(ThimcError):
    """The sign condition -eps * q' > 0 of the Hazzidakis equation fails."""

    def __init__(self, message, t_star=None, partial=None):
        super().__init__(message)
        self.t_star = t_star
        self.partial = partial


class PathDependenceWarning(UserWarning):
    """Two integration paths disagree beyond tolerance."""


class ZeroCurvatureWarning(UserWarning):
    """The Lax pair fails its compatibility condition beyond tolerance."""

