"""Numerical workbench for timelike THIMC surfaces, whose inverse mean curvature 1/H is a harmonic map.

Surfaces live in Minkowski space (c=0), de Sitter space (c=1) or anti de
Sitter space (c=-1).  The package builds them from Lax pairs, generates
closed-form and ODE-based example families, applies Christoffel and Lawson
type transforms and re-verifies every output from the discrete immersion.
"""
from .errors import (DegenerateError, InvariantError, PathDependenceWarning,
                     PoleError, SignConditionError, ThimcError,
                     ZeroCurvatureWarning)

__version__ = "0.1.0"

__all__ = [
    "DegenerateError", "InvariantError", "PathDependenceWarning", "PoleError",
    "SignConditionError", "ThimcError", "ZeroCurvatureWarning", "__version__",
]
