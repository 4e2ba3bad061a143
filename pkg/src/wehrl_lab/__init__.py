"""Coherent-state concentration inequalities on the sphere, plane and hyperbolic disk."""

from .geometry import Geometry, HYPERBOLIC, PLANE, SPHERE
from .spaces import Bergman, Fock, SpherePoly, WeightedFunction

__all__ = [
    "Geometry",
    "SPHERE",
    "PLANE",
    "HYPERBOLIC",
    "SpherePoly",
    "Fock",
    "Bergman",
    "WeightedFunction",
]

__version__ = "0.1.0"
