"""The three model surfaces in their planar charts.

Sphere: stereographic chart on the whole complex plane, total mass 1.
Plane: Lebesgue measure on the complex plane.
Hyperbolic disk: the unit disk with the Poincare area element.

All densities are with respect to planar Lebesgue measure dx dy.  The
isoperimetric profile is H(x) = 4 pi (x - k x^2) with k = +1, 0, -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Geometry:
    kind: str
    # +1 sphere, 0 plane, -1 hyperbolic: the sign entering H(x) = 4 pi (x - k x^2)
    profile_sign: int
    total_mass: float

    @property
    def curvature_sign(self) -> int:
        """Sign convention used in the profile formula: sphere -1, plane 0, disk +1."""
        return -self.profile_sign

    @property
    def token(self) -> str:
        return self.kind

    def in_chart(self, z) -> np.ndarray:
        z = np.asarray(z)
        if self.kind == "hyperbolic":
            return np.abs(z) < 1.0
        return np.isfinite(z)

    def __str__(self) -> str:
        return self.kind


SPHERE = Geometry("sphere", +1, 1.0)
PLANE = Geometry("plane", 0, math.inf)
HYPERBOLIC = Geometry("hyperbolic", -1, math.inf)

_BY_TOKEN = {g.kind: g for g in (SPHERE, PLANE, HYPERBOLIC)}


def from_token(token: str) -> Geometry:
    try:
        return _BY_TOKEN[token.strip().lower()]
    except KeyError:
        raise DomainError(
            f"unknown geometry {token!r}; expected one of {sorted(_BY_TOKEN)}"
        ) from None


def _check_chart(g: Geometry, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if not np.all(g.in_chart(z)):
        raise DomainError(f"point outside the {g.kind} chart")
    return z


def measure_density(g: Geometry, z):
    """Density of the surface measure with respect to dx dy at chart point(s) z."""
    z = _check_chart(g, z)
    r2 = np.abs(z) ** 2
    if g.kind == "sphere":
        out = 1.0 / (math.pi * (1.0 + r2) ** 2)
    elif g.kind == "plane":
        out = np.ones_like(r2)
    else:
        out = 1.0 / (math.pi * (1.0 - r2) ** 2)
    return out[()] if out.ndim == 0 else out


def laplacian_conformal_factor(g: Geometry, z):
    """Factor lambda(z) with Laplace-Beltrami = lambda(z) * Euclidean Laplacian."""
    z = _check_chart(g, z)
    r2 = np.abs(z) ** 2
    if g.kind == "sphere":
        out = math.pi * (1.0 + r2) ** 2
    elif g.kind == "plane":
        out = np.ones_like(r2)
    else:
        out = math.pi * (1.0 - r2) ** 2
    return out[()] if out.ndim == 0 else out


def _check_measure(g: Geometry, x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(~(x < g.total_mass)):
        raise DomainError(f"measure {x} outside (0, {g.total_mass}) for {g.kind}")
    return x


def profile(g: Geometry, x):
    """Isoperimetric profile H(x) on the open interval (0, total_mass)."""
    x = _check_measure(g, x)
    out = 4.0 * math.pi * (x - g.profile_sign * x * x)
    return out[()] if out.ndim == 0 else out


def profile_derivative(g: Geometry, x):
    x = _check_measure(g, x)
    out = 4.0 * math.pi * (1.0 - 2.0 * g.profile_sign * x)
    return out[()] if out.ndim == 0 else out


def profile_unchecked(g: Geometry, x):
    """H(x) without domain checks; used inside the ODE right-hand side.

    On the sphere this is the extension with H(1) = 0, and it stays a
    polynomial outside (0, 1) so the integrator can overshoot harmlessly.
    """
    return 4.0 * math.pi * (x - g.profile_sign * x * x)
