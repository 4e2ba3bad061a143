"""Weighted analytic function spaces and their coherent states.

Three spaces, each living on one of the model geometries:

* ``SpherePoly(j, p)``: polynomials of degree <= j with weighted modulus
  |f(z)| / (1 + |z|^2)^(j/2) on the sphere chart;
* ``Fock(alpha, p)``: entire functions with weighted modulus
  |f(z)| exp(-alpha |z|^2 / 2) on the plane;
* ``Bergman(alpha, p)``: analytic functions on the disk with weighted
  modulus |f(z)| (1 - |z|^2)^(alpha / p).

The p-norm is ``(C * integral of modulus^p)^(1/p)`` with C chosen so that
the constant function 1 has norm one: C = pj/2 + 1, p alpha / 2pi and
alpha - 1 respectively.

Everything is computed in log space; ``u_log`` is the logarithm of the
weighted modulus and equals -inf exactly at the zeros of f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize
from scipy.special import gammaln

from . import quadrature
from .errors import DomainError
from .geometry import HYPERBOLIC, PLANE, SPHERE, Geometry

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoly:
    j: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 0:
            raise DomainError(f"j must be a non-negative integer, got {self.j}")
        if not self.p > 0:
            raise DomainError(f"p must be positive, got {self.p}")
        object.__setattr__(self, "j", int(self.j))

    geometry = SPHERE

    @property
    def norm_constant(self) -> float:
        return self.p * self.j / 2.0 + 1.0

    @property
    def c(self) -> float:
        return 2.0 * math.pi * self.j

    def log_weight(self, z):
        return -0.5 * self.j * np.log1p(np.abs(z) ** 2)

    def describe(self) -> dict:
        return {"geometry": "sphere", "j": self.j, "p": self.p}


@dataclass(frozen=True)
class Fock:
    alpha: float
    p: float = 2.0

    def __post_init__(self):
        if not self.alpha > 0 or not self.p > 0:
            raise DomainError(f"Fock space needs alpha > 0, p > 0 (got {self.alpha}, {self.p})")

    geometry = PLANE

    @property
    def norm_constant(self) -> float:
        return self.p * self.alpha / (2.0 * math.pi)

    @property
    def c(self) -> float:
        return 2.0 * self.alpha

    def log_weight(self, z):
        return -0.5 * self.alpha * np.abs(z) ** 2

    def describe(self) -> dict:
        return {"geometry": "plane", "alpha": self.alpha, "p": self.p}


@dataclass(frozen=True)
class Bergman:
    alpha: float
    p: float = 2.0

    def __post_init__(self):
        if not self.alpha > 1 or not self.p > 0:
            raise DomainError(f"Bergman space needs alpha > 1, p > 0 (got {self.alpha}, {self.p})")

    geometry = HYPERBOLIC

    @property
    def norm_constant(self) -> float:
        return self.alpha - 1.0

    @property
    def c(self) -> float:
        return 4.0 * math.pi * self.alpha / self.p

    def log_weight(self, z):
        with np.errstate(divide="ignore"):
            return (self.alpha / self.p) * np.log1p(-np.abs(z) ** 2)

    def describe(self) -> dict:
        return {"geometry": "hyperbolic", "alpha": self.alpha, "p": self.p}


SpaceParams = Union[SpherePoly, Fock, Bergman]


@dataclass(frozen=True)
class SubharmonicityData:
    c: float
    t0_extremal: float = 0.0


def subharmonicity(space: SpaceParams) -> SubharmonicityData:
    """Lower bound -c on the Laplace-Beltrami operator of u = log(weighted modulus)."""
    return SubharmonicityData(space.c, 0.0)


@dataclass(frozen=True, eq=False)
class WeightedFunction:
    """A polynomial (``coeffs``, lowest degree first) or a closed-form coherent state.

    ``coherent`` holds (alpha, beta) for the sphere and the center a for the
    plane and the disk.  ``scale`` multiplies the coherent closed form.
    """

    space: SpaceParams
    coeffs: np.ndarray | None = None
    coherent: tuple | complex | None = None
    scale: complex = 1.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if (self.coeffs is None) == (self.coherent is None):
            raise DomainError("give exactly one of coeffs or coherent")
        if self.coeffs is not None:
            c = np.array(self.coeffs, dtype=complex).ravel()
            if c.size == 0:
                raise DomainError("empty coefficient vector")
            if isinstance(self.space, SpherePoly) and c.size > self.space.j + 1:
                if np.any(c[self.space.j + 1:] != 0):
                    raise DomainError(
                        f"degree {c.size - 1} exceeds j = {self.space.j} for the sphere space"
                    )
                c = c[: self.space.j + 1]
            c.setflags(write=False)
            object.__setattr__(self, "coeffs", c)
        else:
            _check_coherent(self.space, self.coherent)

    @property
    def geometry(self) -> Geometry:
        return self.space.geometry

    @property
    def is_coherent(self) -> bool:
        return self.coherent is not None

    @property
    def degree(self) -> int:
        if self.coeffs is None:
            return self.space.j if isinstance(self.space, SpherePoly) else 0
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    def with_p(self, p: float) -> "WeightedFunction":
        """Same analytic function viewed in the space with exponent p."""
        if p == self.space.p:
            return self
        if self.coherent is not None and isinstance(self.space, Bergman):
            raise DomainError("Bergman coherent states depend on p; rebuild them instead")
        return replace(self, space=replace(self.space, p=p))

    def scaled(self, factor: complex) -> "WeightedFunction":
        if self.coeffs is not None:
            return replace(self, coeffs=self.coeffs * factor)
        return replace(self, scale=self.scale * factor)

    def zeros(self) -> np.ndarray:
        """Finite zeros of f in the chart (the sphere's point at infinity excluded)."""
        if self.coherent is not None:
            if isinstance(self.space, SpherePoly) and self.space.j > 0:
                a, b = self.coherent
                if b != 0:
                    return np.array([-np.conj(a) / b])
            return np.empty(0, complex)
        c = np.trim_zeros(self.coeffs, "b")
        if c.size <= 1:
            return np.empty(0, complex)
        roots = np.roots(c[::-1])
        if isinstance(self.space, Bergman):
            roots = roots[np.abs(roots) < 1.0]
        return roots

    def describe(self) -> dict:
        out = {"space": self.space.describe()}
        if self.coeffs is not None:
            out["coeffs"] = [[float(c.real), float(c.imag)] for c in self.coeffs]
        elif isinstance(self.space, SpherePoly):
            a, b = self.coherent
            out["coherent"] = [a.real, a.imag, b.real, b.imag]
        else:
            a = complex(self.coherent)
            out["coherent"] = [a.real, a.imag]
        if self.label:
            out["label"] = self.label
        return out


def _check_coherent(space, designation):
    if isinstance(space, SpherePoly):
        try:
            a, b = designation
        except (TypeError, ValueError):
            raise DomainError("sphere coherent states need a pair (alpha, beta)") from None
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > UNIT_TOL:
            raise DomainError(f"|alpha|^2 + |beta|^2 must be 1, got {abs(a)**2 + abs(b)**2}")
    elif isinstance(space, Bergman):
        if not abs(complex(designation)) < 1.0:
            raise DomainError("Bergman coherent state center must lie in the unit disk")


def polynomial(space: SpaceParams, coeffs, label: str = "") -> WeightedFunction:
    return WeightedFunction(space, coeffs=np.asarray(coeffs, dtype=complex), label=label)


def coherent_state(space: SpaceParams, designation=None) -> WeightedFunction:
    """Normalized coherent state.

    Sphere: designation (alpha, beta) gives (beta z + conj(alpha))^j.
    Plane: center a gives exp(alpha conj(a) z - alpha |a|^2 / 2).
    Disk: center a gives (1 - |a|^2)^(alpha/p) / (1 - z conj(a))^(2 alpha/p).
    """
    if isinstance(space, SpherePoly):
        a, b = designation if designation is not None else (1.0, 0.0)
        des = (complex(a), complex(b))
    else:
        des = complex(designation if designation is not None else 0.0)
    return WeightedFunction(space, coherent=des, label="coherent")


# -- evaluation ---------------------------------------------------------------


def _log_abs_poly(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.abs(P.polyval(z, c)))


def u_log(f: WeightedFunction, z, gap=None):
    """log of the weighted modulus; -inf at zeros of f.

    Sphere points may be complex infinity, where the value is log|c_j|.
    On the disk, ``gap`` may supply 1 - |z|^2 directly for points so close
    to the boundary that |z| rounds to 1.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    space = f.space
    if isinstance(space, Bergman):
        if gap is None:
            if np.any(np.abs(z) >= 1.0):
                raise DomainError("point outside the unit disk")
            gap = (1.0 - np.abs(z)) * (1.0 + np.abs(z))
        gap = np.broadcast_to(np.asarray(gap, dtype=float), z.shape)
    out = np.empty(z.shape, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if f.coherent is not None:
            out[...] = _coherent_log(f, z, gap)
        elif isinstance(space, SpherePoly):
            j = space.j
            c = np.zeros(j + 1, complex)
            c[: f.coeffs.size] = f.coeffs
            inner = np.abs(z) <= 1.0
            zi = z[inner]
            out[inner] = _log_abs_poly(c, zi) - 0.5 * j * np.log1p(np.abs(zi) ** 2)
            zo = z[~inner]
            w = np.where(np.isinf(zo), 0.0, 1.0 / np.where(np.isinf(zo), 1.0, zo))
            out[~inner] = _log_abs_poly(c[::-1], w) - 0.5 * j * np.log1p(np.abs(w) ** 2)
        elif isinstance(space, Bergman):
            out[...] = _log_abs_poly(f.coeffs, z) + (space.alpha / space.p) * np.log(gap)
        else:
            out[...] = _log_abs_poly(f.coeffs, z) + space.log_weight(z)
    if f.coherent is not None and f.scale != 1.0:
        out += math.log(abs(f.scale))
    return out[0] if scalar else out


def u_log_nodes(f: WeightedFunction, rule: quadrature.QuadratureRule, mask=None):
    """u at the nodes of a rule (optionally a boolean subset), using its boundary gaps."""
    z, gap = rule.nodes, rule.gap
    if mask is not None:
        z = z[mask]
        gap = None if gap is None else gap[mask]
    return u_log(f, z, gap)


def _coherent_log(f: WeightedFunction, z: np.ndarray, gap=None) -> np.ndarray:
    space = f.space
    if isinstance(space, SpherePoly):
        a, b = f.coherent
        j = space.j
        if j == 0:
            return np.zeros(z.shape)
        inner = np.abs(z) <= 1.0
        out = np.empty(z.shape)
        zi = z[inner]
        out[inner] = j * (np.log(np.abs(b * zi + np.conj(a))) - 0.5 * np.log1p(np.abs(zi) ** 2))
        zo = z[~inner]
        w = np.where(np.isinf(zo), 0.0, 1.0 / np.where(np.isinf(zo), 1.0, zo))
        out[~inner] = j * (np.log(np.abs(b + np.conj(a) * w)) - 0.5 * np.log1p(np.abs(w) ** 2))
        return out
    a = complex(f.coherent)
    if isinstance(space, Fock):
        return -0.5 * space.alpha * np.abs(z - a) ** 2
    # |phi_a(z)|^2 = |z - a|^2 / |1 - conj(a) z|^2 and 1 - |phi_a|^2 = (1-|a|^2)(1-|z|^2)/|1-conj(a) z|^2
    k = space.alpha / space.p
    return k * (math.log1p(-abs(a) ** 2) + np.log(gap) - 2.0 * np.log(np.abs(1.0 - np.conj(a) * z)))


def weighted_modulus(f: WeightedFunction, z):
    with np.errstate(under="ignore"):
        return np.exp(u_log(f, z))


# -- quadrature helpers -------------------------------------------------------


def _angular_degree(f: WeightedFunction, p: float, radius: float | None) -> int:
    """Bandwidth estimate for the angular dependence of modulus^p."""
    space = f.space
    if f.coeffs is not None or isinstance(space, SpherePoly):
        return int(math.ceil(max(p, 2.0) / 2.0)) * max(f.degree, 1)
    a = abs(complex(f.coherent))
    if a == 0.0:
        return 1
    if isinstance(space, Fock):
        x = p * space.alpha * a * (radius or 1.0)
        return int(math.ceil(x + 10.0 * math.sqrt(x) + 10.0))
    # geometric decay (r|a|)^k of the Fourier modes, r -> 1
    return int(math.ceil(40.0 / -math.log(a)))


def plane_truncation_radius(f: WeightedFunction, p: float | None = None) -> float:
    """Radius where modulus^p has dropped below 1e-30 of its peak (upper bound)."""
    space = f.space
    p = space.p if p is None else p
    base = quadrature.plane_radius(space.alpha, p)
    if f.coherent is not None:
        return abs(complex(f.coherent)) + base
    c = np.abs(f.coeffs)
    if not np.any(c > 0):
        raise DomainError("zero function")
    d = f.degree
    zs = f.zeros()
    reach = max([1.0, math.sqrt(max(d, 1) / space.alpha)] + [abs(z) for z in zs])
    r = np.linspace(0.0, 2.0 * (reach + base), 20001)
    with np.errstate(divide="ignore"):
        bound = np.log(P.polyval(r, c)) - 0.5 * space.alpha * r**2
    peak = int(np.argmax(bound))
    below = np.flatnonzero(p * (bound[peak:] - bound[peak]) <= -quadrature.LOG_TRUNCATION)
    return float(r[peak + below[0]]) if below.size else float(r[-1])


def default_rule(
    f: WeightedFunction,
    p: float | None = None,
    *,
    smooth: bool | None = None,
    n_r: int | None = None,
    n_theta: int | None = None,
) -> quadrature.QuadratureRule:
    """Quadrature rule suited to integrals of functions of |f| on f's geometry.

    With ``smooth`` true (the default for even integer p) the integrand is a
    polynomial times the weight and the plain product rule applies.
    Otherwise a paneled rule with breaks at the zeros of f is built.
    """
    space = f.space
    p = space.p if p is None else p
    if smooth is None:
        smooth = float(p).is_integer() and int(p) % 2 == 0
    radius = plane_truncation_radius(f, p) if isinstance(space, Fock) else None
    deg = _angular_degree(f, p, radius)
    if smooth:
        nr = n_r or 256
        nt = n_theta or 2 * deg + 16
        return quadrature.build_rule(space.geometry, replace(space, p=p), nr, nt, radius=radius)
    kinks = list(f.zeros())
    if isinstance(space, Bergman) and f.coeffs is not None and f.degree > 0:
        # zeros just outside the disk still make |f|^p sharply peaked near the rim
        kinks = list(np.roots(np.trim_zeros(f.coeffs, "b")[::-1]))
    if kinks:
        nr = n_r or 64
        nt = n_theta or max(64, 2 * deg + 16)
    else:
        nr = n_r or 256
        nt = n_theta or max(64, 2 * deg + 16)
    return quadrature.build_rule(
        space.geometry, replace(space, p=p), nr, nt, kinks=kinks, radius=radius
    )


def p_norm(f: WeightedFunction, p: float | None = None, rule=None) -> float:
    """(C * integral of modulus^p)^(1/p) over the geometry."""
    g = f.with_p(p) if p is not None else f
    p = g.space.p
    rule = rule or default_rule(g)
    with np.errstate(under="ignore"):
        total = quadrature.weighted_sum(rule, np.exp(p * u_log_nodes(g, rule)))
    if not total > 0:
        raise DomainError("zero function has no normalization")
    return (g.space.norm_constant * total) ** (1.0 / p)


def normalize(f: WeightedFunction, rule=None) -> WeightedFunction:
    return f.scaled(1.0 / p_norm(f, rule=rule))


def mobius_isometry(space: SpherePoly, ab, coeffs) -> np.ndarray:
    """Coefficients of (beta z + conj alpha)^j f((alpha z - conj beta)/(beta z + conj alpha))."""
    a, b = (complex(v) for v in ab)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > UNIT_TOL:
        raise DomainError(f"|alpha|^2 + |beta|^2 must be 1, got {abs(a)**2 + abs(b)**2}")
    j = space.j
    c = np.zeros(j + 1, complex)
    cin = np.asarray(coeffs, dtype=complex)
    if cin.size > j + 1 and np.any(cin[j + 1:] != 0):
        raise DomainError("polynomial degree exceeds j")
    c[: min(cin.size, j + 1)] = cin[: j + 1]
    num = np.array([-np.conj(b), a])
    den = np.array([np.conj(a), b])
    out = np.zeros(j + 1, complex)
    for k, ck in enumerate(c):
        if ck == 0:
            continue
        term = P.polymul(P.polypow(num, k), P.polypow(den, j - k))
        out[: term.size] += ck * term[: j + 1]
    return out


def sup_weighted_modulus(f: WeightedFunction):
    """Maximum of the weighted modulus and a point where it is attained.

    Coarse search over quadrature nodes, then Nelder-Mead ascent from the
    best few.  On the sphere the point at infinity (value |c_j|) is also
    a candidate and is reported as complex infinity.
    """
    space = f.space
    rule = default_rule(f, 2.0, smooth=True, n_r=96, n_theta=max(64, 4 * f.degree + 16)) \
        if not (isinstance(space, Bergman) and f.coherent is not None) else default_rule(f, n_r=96)
    u = u_log_nodes(f, rule)
    if isinstance(space, Bergman):
        u = np.where(np.abs(rule.nodes) < 1.0, u, -np.inf)
    order = np.argsort(-u, kind="stable")[:5]
    best_val, best_z = -math.inf, complex(rule.nodes[order[0]])

    def neg(xy):
        zz = complex(xy[0], xy[1])
        if isinstance(space, Bergman) and abs(zz) >= 1.0:
            return math.inf
        return -float(u_log(f, zz))

    for k in order:
        z0 = rule.nodes[k]
        res = optimize.minimize(
            neg, [z0.real, z0.imag], method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000},
        )
        val = -res.fun
        if u[k] > val:
            val, zz = float(u[k]), complex(z0)
        else:
            zz = complex(res.x[0], res.x[1])
        if val > best_val:
            best_val, best_z = val, zz
    if isinstance(space, SpherePoly):
        pole = float(u_log(f, complex(math.inf, 0.0)))
        if pole >= best_val or abs(best_z) > 1e8:
            best_val, best_z = pole, complex(math.inf, 0.0)
    return math.exp(best_val), best_z


# -- random inputs -------------------------------------------------------------


def monomial_norms(space: SpaceParams, degree: int) -> np.ndarray:
    """L2 norms of z^k, k = 0..degree, in the p = 2 version of the space."""
    k = np.arange(degree + 1)
    if isinstance(space, SpherePoly):
        lognorm2 = gammaln(k + 1) + gammaln(space.j - k + 1) - gammaln(space.j + 1)
    elif isinstance(space, Fock):
        lognorm2 = gammaln(k + 1) - k * math.log(space.alpha)
    else:
        lognorm2 = gammaln(k + 1) + gammaln(space.alpha) - gammaln(k + space.alpha)
    return np.exp(0.5 * lognorm2)


def random_function(space: SpaceParams, rng: np.random.Generator, degree: int | None = None,
                    normalized: bool = True) -> WeightedFunction:
    """Complex Gaussian coefficients in the orthonormal monomial basis."""
    if degree is None:
        degree = space.j if isinstance(space, SpherePoly) else 3
    if isinstance(space, SpherePoly) and degree > space.j:
        raise DomainError("degree exceeds j")
    xi = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / math.sqrt(2)
    f = polynomial(space, xi / monomial_norms(space, degree), label="random")
    return normalize(f) if normalized else f


def random_su2(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    return complex(v[0], v[1]), complex(v[2], v[3])
