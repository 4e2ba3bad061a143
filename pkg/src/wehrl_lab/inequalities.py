"""Both sides of the sharp functional inequalities, and their verdicts.

Convention: the convex weight G is applied to the bare quantity e^{pu}
(the p-th power of the weighted modulus), without the space's
normalization constant.  Every right-hand side is an integral over
s in [0, mass] of G(e^{p mu0^{-1}(s)}), which has a closed-form integrand:

    sphere      (1 - s)^(pj/2)
    plane       exp(-p alpha s / 2 pi)
    hyperbolic  (1 + s)^(-alpha)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as sp_integrate

from . import comparison, distribution as dist, quadrature
from .errors import ConfigurationError, DomainError, ResolutionError
from .geometry import Geometry
from .spaces import (Bergman, Fock, SpaceParams, SpherePoly, WeightedFunction, default_rule,
                     p_norm, u_log_nodes)

XLOGX_FLOOR = 1e-300
DIVERGENCE_CAP = 1e6
NORMALIZED_TOL = 1e-6
QUADRATURE_TOL = 1e-6
DISTRIBUTION_TOL = 5e-3
# angular and radial order of the rule behind distribution-based diagnostics
DIAGNOSTIC_ORDER = 512


# -- convex weights -------------------------------------------------------------


class ConvexWeight:
    name = "weight"
    positive = True       # G(x) > 0 for every x > 0
    polynomial_degree: int | None = None

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, x):
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        return []

    def describe(self) -> dict:
        return {"name": self.name}

    def check_convex(self, upper: float = 1.0, n: int = 1000, slack: float = 1e-12) -> bool:
        x = np.linspace(0.0, upper, n)
        a, b = np.meshgrid(x, x[::37])
        lhs = self((a + b) / 2)
        rhs = (self(a) + self(b)) / 2
        return bool(self(np.array([0.0]))[0] == 0.0 and np.all(rhs - lhs >= -slack))


@dataclass(frozen=True)
class Power(ConvexWeight):
    s: float = 1.0
    name = "power"

    def __post_init__(self):
        if not self.s >= 1:
            raise ConfigurationError(f"power weight needs s >= 1, got {self.s}")

    @property
    def polynomial_degree(self):
        return int(self.s) if float(self.s).is_integer() else None

    def __call__(self, x):
        return np.asarray(x, dtype=float) ** self.s

    def derivative(self, x):
        return self.s * np.asarray(x, dtype=float) ** (self.s - 1)

    def describe(self):
        return {"name": "power", "s": self.s}


@dataclass(frozen=True)
class XLogX(ConvexWeight):
    name = "xlogx"
    positive = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        safe = np.where(x < XLOGX_FLOOR, 1.0, x)
        return np.where(x < XLOGX_FLOOR, 0.0, safe * np.log(safe))

    def derivative(self, x):
        return np.log(np.asarray(x, dtype=float)) + 1.0

    def describe(self):
        return {"name": "xlogx"}


@dataclass(frozen=True)
class Hinge(ConvexWeight):
    lam: float = 0.5
    name = "hinge"
    positive = False

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ConfigurationError(f"hinge needs 0 < lambda < 1, got {self.lam}")

    def __call__(self, x):
        return np.maximum(np.asarray(x, dtype=float) - self.lam, 0.0)

    def derivative(self, x):
        return (np.asarray(x, dtype=float) > self.lam).astype(float)

    def breakpoints(self):
        return [self.lam]

    def describe(self):
        return {"name": "hinge", "lambda": self.lam}


class Tabulated(ConvexWeight):
    """Piecewise-linear G through (x_k, y_k), starting at (0, 0), convexity-checked."""

    name = "tabulated"

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ConfigurationError("tabulated weight needs matching 1-d samples")
        if xs[0] != 0.0 or ys[0] != 0.0 or np.any(np.diff(xs) <= 0):
            raise ConfigurationError("tabulated weight must start at (0, 0) with increasing x")
        slopes = np.diff(ys) / np.diff(xs)
        if np.any(np.diff(slopes) < -1e-12):
            raise ConfigurationError("tabulated weight is not convex")
        self.xs, self.ys, self.slopes = xs, ys, slopes
        self.positive = bool(slopes[0] > 0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.interp(x, self.xs, self.ys)
        beyond = self.ys[-1] + self.slopes[-1] * (x - self.xs[-1])
        return np.where(x > self.xs[-1], beyond, inside)

    def derivative(self, x):
        k = np.clip(np.searchsorted(self.xs, np.asarray(x, dtype=float), side="right") - 1,
                    0, self.slopes.size - 1)
        return self.slopes[k]

    def breakpoints(self):
        return list(self.xs[1:-1])

    def describe(self):
        return {"name": "tabulated", "x": self.xs.tolist(), "y": self.ys.tolist()}


def parse_weight(token: str) -> ConvexWeight:
    """'power:s', 'xlogx' or 'hinge:lambda'."""
    name, _, arg = token.strip().lower().partition(":")
    try:
        if name == "power":
            return Power(float(arg) if arg else 1.0)
        if name == "xlogx" and not arg:
            return XLogX()
        if name == "hinge":
            return Hinge(float(arg))
    except ValueError:
        pass
    raise ConfigurationError(f"cannot parse weight {token!r}; use power:s, xlogx or hinge:lambda")


# -- reports ----------------------------------------------------------------------


@dataclass
class VerificationReport:
    inequality: str
    space: dict
    G: dict
    lhs: float
    rhs: float
    tolerance: float
    equality_diagnostic: float = math.nan
    verdict: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        if self.lhs == -math.inf and self.rhs == -math.inf:
            return 0.0
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def as_dict(self) -> dict:
        out = {
            "inequality": self.inequality, "space": self.space, "G": self.G,
            "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
            "tolerance": self.tolerance, "pass": self.passed,
            "equality_diagnostic": self.equality_diagnostic,
        }
        if self.verdict:
            out["verdict"] = self.verdict
        out.update(self.extra)
        return out


# -- left-hand sides ---------------------------------------------------------------


def _smooth_integrand(f: WeightedFunction, G: ConvexWeight) -> bool:
    """G(|f|^p weight^p) is a polynomial in z, conj z times the weight."""
    deg = G.polynomial_degree
    ps = f.space.p * deg if deg is not None else None
    return ps is not None and float(ps).is_integer() and int(ps) % 2 == 0


def functional_rule(f: WeightedFunction, G: ConvexWeight | None = None) -> quadrature.QuadratureRule:
    return default_rule(f, smooth=G is not None and _smooth_integrand(f, G))


def _check_normalized(f: WeightedFunction, rule=None):
    norm = p_norm(f, rule=rule)
    if abs(norm - 1.0) > NORMALIZED_TOL:
        raise DomainError(f"function is not normalized (p-norm {norm})")


def functional_lhs(f: WeightedFunction, G: ConvexWeight, rule=None, *, check: bool = True) -> float:
    """Integral of G(e^{pu}) over the geometry; -inf flags a divergent negative part."""
    rule = rule or functional_rule(f, G)
    if check:
        _check_normalized(f)
    p = f.space.p
    with np.errstate(under="ignore"):
        vals = np.asarray(G(np.exp(p * u_log_nodes(f, rule))), dtype=float)
    negative = quadrature.weighted_sum(rule, np.minimum(vals, 0.0))
    if negative < -DIVERGENCE_CAP:
        return -math.inf
    return quadrature.weighted_sum(rule, vals)


def wehrl_entropy(f: WeightedFunction, rule=None) -> float:
    """-(j+1) times the integral of rho log rho, rho = |f|^2 / (1+|z|^2)^j."""
    if not isinstance(f.space, SpherePoly):
        raise DomainError("the Wehrl entropy is defined here for the sphere space")
    g = f.with_p(2.0)
    return -(g.space.j + 1) * functional_lhs(g, XLogX(), rule)


# -- right-hand sides ---------------------------------------------------------------


def extremal_profile(space: SpaceParams) -> Callable[[float], float]:
    """s -> e^{p mu0^{-1}(s)}, the rearranged extremal."""
    p = space.p
    if isinstance(space, SpherePoly):
        e = p * space.j / 2.0
        return lambda s: (1.0 - s) ** e if s < 1.0 else 0.0
    if isinstance(space, Fock):
        rate = p * space.alpha / (2.0 * math.pi)
        return lambda s: math.exp(-rate * s)
    return lambda s: (1.0 + s) ** (-space.alpha)


def _quad(fn, lo, hi, points=()):
    kw = dict(epsabs=0.0, epsrel=1e-12, limit=400)
    if hi == math.inf:
        return sp_integrate.quad(fn, lo, hi, **kw)[0]
    pts = [p for p in points if lo < p < hi]
    return sp_integrate.quad(fn, lo, hi, points=pts or None, **kw)[0]


def _profile_breaks(space: SpaceParams, G: ConvexWeight, upper: float) -> list[float]:
    """Measures s where the extremal profile crosses a kink of G."""
    prof_inv = comparison.mu0(space)
    out = []
    for x in G.breakpoints():
        if 0.0 < x < 1.0:
            out.append(float(prof_inv.mu0(math.log(x) / space.p)))
    return [s for s in out if s < upper]


def global_rhs(space: SpaceParams, G: ConvexWeight) -> float:
    """Integral over [0, mass] of G applied to the extremal profile."""
    prof = extremal_profile(space)
    mass = space.geometry.total_mass
    breaks = _profile_breaks(space, G, mass)
    if mass == math.inf and breaks:
        head = _quad(lambda s: float(G(prof(s))), 0.0, max(breaks), breaks)
        return head + _quad(lambda s: float(G(prof(s))), max(breaks), math.inf)
    return _quad(lambda s: float(G(prof(s))), 0.0, mass, breaks)


def global_rhs_t_form(space: SpaceParams, G: ConvexWeight) -> float:
    """Integral over t < 0 of G'(e^{pt}) p e^{pt} mu0(t)."""
    p = space.p
    curve = comparison.mu0(space)
    pts = [math.log(x) / p for x in G.breakpoints() if 0.0 < x < 1.0]

    def integrand(t):
        x = math.exp(p * t)
        if x == 0.0:
            return 0.0
        m = float(curve.mu0(t))
        if not math.isfinite(m):
            return 0.0
        return float(G.derivative(x)) * p * x * m

    with np.errstate(over="ignore"):
        if pts:
            lo = min(pts)
            return _quad(integrand, -math.inf, lo) + _quad(integrand, lo, 0.0, pts)
        return _quad(integrand, -math.inf, 0.0)


def faber_krahn_rhs(space: SpaceParams, G: ConvexWeight, budget: float) -> float:
    """Integral over [0, budget] of G applied to the extremal profile."""
    if not G.positive:
        raise DomainError(f"{G.name} weight is not positive on (0, inf); local bound does not apply")
    mass = space.geometry.total_mass
    if not 0.0 < budget <= mass:
        raise DomainError(f"budget {budget} outside (0, {mass}]")
    prof = extremal_profile(space)
    return _quad(lambda s: float(G(prof(s))), 0.0, budget, _profile_breaks(space, G, budget))


# -- verifications ----------------------------------------------------------------------


def diagnostic(f: WeightedFunction) -> float:
    """sup |mu - mu0| / max(1, mu0) for f normalized in its own p-norm."""
    d = dist.build_distribution(f, dist.distribution_rule(f, DIAGNOSTIC_ORDER, DIAGNOSTIC_ORDER))
    return comparison.distance_to_mu0(d, comparison.mu0(f.space))


def _describe(f: WeightedFunction) -> dict:
    return f.space.describe()


def verify_global(f: WeightedFunction, G: ConvexWeight, rule=None,
                  tol: float | None = None) -> VerificationReport:
    """Global bound; weights with kinks get the distribution tolerance because the kink
    follows a level curve of f that the product rule cannot align with."""
    if tol is None:
        tol = DISTRIBUTION_TOL if G.breakpoints() else QUADRATURE_TOL
    lhs = functional_lhs(f, G, rule)
    rhs = global_rhs(f.space, G)
    verdict = "both-divergent" if lhs == -math.inf and rhs == -math.inf else None
    return VerificationReport("global", _describe(f), G.describe(), lhs, rhs, tol,
                              diagnostic(f), verdict)


def verify_wehrl(f: WeightedFunction, rule=None, tol: float = QUADRATURE_TOL) -> VerificationReport:
    g = f.with_p(2.0)
    j = g.space.j
    entropy = wehrl_entropy(g, rule)
    return VerificationReport("wehrl", _describe(g), XLogX().describe(), j / (j + 1.0), entropy,
                              tol, diagnostic(g))


def verify_contractivity(f: WeightedFunction, p: float, q: float,
                         tol: float = 1e-9) -> VerificationReport:
    """||f||_q <= ||f||_p for p <= q (sphere and plane spaces)."""
    if not 0 < p <= q:
        raise DomainError(f"need 0 < p <= q, got p = {p}, q = {q}")
    if isinstance(f.space, Bergman):
        raise DomainError("contractivity is checked for the sphere and plane spaces only")
    norm_q = p_norm(f, q)
    norm_p = p_norm(f, p)
    g = f.with_p(p).scaled(1.0 / norm_p)
    rep = VerificationReport("contractivity", _describe(f), {"p": p, "q": q}, norm_q, norm_p,
                             tol, diagnostic(g))
    return rep


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def describe(self):
        return {"disk": [self.center.real, self.center.imag, self.radius]}


@dataclass(frozen=True)
class Superlevel:
    threshold: float
    budget: float

    def describe(self):
        return {"superlevel": {"t": self.threshold, "budget": self.budget}}


def region_rule(f: WeightedFunction) -> quadrature.QuadratureRule:
    return dist.distribution_rule(f)


def best_region(f: WeightedFunction, budget: float, d: dist.EmpiricalDistribution | None = None
                ) -> Superlevel:
    """Superlevel set {u >= u*(budget)} with the boundary level taken fractionally."""
    d = d or dist.build_distribution(f, region_rule(f))
    if not 0.0 < budget < d.total:
        raise DomainError(f"budget {budget} outside (0, {d.total})")
    return Superlevel(float(dist.rearrangement(d, budget)), float(budget))


def local_lhs(f: WeightedFunction, region, G: ConvexWeight, rule=None, d=None):
    """(lhs, measure) of the region on the shared node set."""
    p = f.space.p
    if isinstance(region, Superlevel):
        d = d or dist.build_distribution(f, rule or region_rule(f))
        lhs = dist.layer_cake(d, lambda v: G(np.exp(p * v)), upper=region.budget)
        return lhs, region.budget
    rule = rule or region_rule(f)
    inside = region.contains(rule.nodes)
    if np.count_nonzero(inside) < 10:
        raise ResolutionError("region holds fewer than 10 quadrature nodes")
    w = rule.weights[inside]
    with np.errstate(under="ignore"):
        vals = np.asarray(G(np.exp(p * u_log_nodes(f, rule, inside))), dtype=float)
    return math.fsum(w * vals), math.fsum(w)


def verify_local(f: WeightedFunction, region, G: ConvexWeight, rule=None, d=None,
                 tol: float = DISTRIBUTION_TOL, check: bool = True) -> VerificationReport:
    if check:
        _check_normalized(f)
    lhs, measure = local_lhs(f, region, G, rule, d)
    mass = f.geometry.total_mass
    rhs = faber_krahn_rhs(f.space, G, min(measure, mass))
    return VerificationReport("local", _describe(f), G.describe(), lhs, rhs, tol, math.nan,
                              extra={"region": region.describe(), "measure": measure})


def geodesic_disk(g: Geometry, center: complex, measure: float) -> Disk:
    """Chart disk equal to the geodesic disk of the given measure about ``center``."""
    c = complex(center)
    if g.kind == "plane":
        return Disk(c, math.sqrt(measure / math.pi))
    if g.kind == "sphere":
        if not 0 < measure < 1:
            raise DomainError("sphere disk measure must lie in (0, 1)")
        R2 = measure / (1.0 - measure)
        A = 1.0 - R2 * abs(c) ** 2
        if A <= 0:
            raise DomainError("this cap contains the point at infinity")
        mid = (1.0 + R2) * c / A
    else:
        if not g.in_chart(c):
            raise DomainError("center outside the disk")
        R2 = measure / (1.0 + measure)
        A = 1.0 - R2 * abs(c) ** 2
        mid = (1.0 - R2) * c / A
    rad2 = abs(mid) ** 2 - (abs(c) ** 2 - R2) / A
    return Disk(mid, math.sqrt(rad2))


def random_disk(g: Geometry, measure: float, rng: np.random.Generator) -> Disk:
    """Geodesic disk of the given measure around a random center."""
    while True:
        if g.kind == "hyperbolic":
            c = 0.7 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        else:
            c = 2.0 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        try:
            return geodesic_disk(g, complex(c), measure)
        except DomainError:
            continue
