"""Product quadrature rules on the three charts.

Every rule is a polar product rule.  Weights already contain the surface
measure, so ``sum(w * phi(z))`` approximates the integral of phi against
the geometry's measure.

Plain rules (smooth integrands):

* sphere: Gauss-Legendre in s = |z|^2 / (1 + |z|^2), where dm = ds dtheta / 2pi;
* plane: Gauss-Legendre in r on [0, R], with R cut where the Gaussian weight
  drops below 1e-30 of its peak;
* hyperbolic: Gauss-Jacobi in rho = |z|^2 with weight (1 - rho)^(alpha - 2),
  i.e. matched to the decay (1 + s)^(-alpha) in s = |z|^2 / (1 - |z|^2).

Paneled rules are used when the integrand has kinks, which for |f|^p with
non-even p happens at the zeros of f.  Radial panels break at the radii of
the kinks and angular panels at their arguments, so every kink sits on a
panel corner.  Beyond the last kink the paneled hyperbolic rule switches to
Gauss-Laguerre in x = -log(1 - |z|^2), where logarithmic factors such as
those of an entropy integrand become polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_laguerre, roots_legendre

from .errors import ConfigurationError, EvaluationError
from .geometry import Geometry

# weight cutoff relative to its peak for the plane truncation
TRUNCATION_LEVEL = 1e-30
LOG_TRUNCATION = -math.log(TRUNCATION_LEVEL)

# breakpoints closer than this are merged
_MERGE = 1e-10


@dataclass(frozen=True)
class QuadratureRule:
    geometry: Geometry
    nodes: np.ndarray
    weights: np.ndarray
    radial_order: int
    angular_order: int
    truncation: dict = field(default_factory=dict)
    # 1 - |z|^2 at each node, kept separately for the disk where it underflows |z|
    gap: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.gap):
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)


@lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = roots_legendre(n)
    return x, w


@lru_cache(maxsize=64)
def _jacobi(n: int, a: float):
    x, w = roots_jacobi(n, a, 0.0)
    return x, w


@lru_cache(maxsize=64)
def _laguerre(n: int):
    # scipy's weights underflow for large nodes; those nodes carry no mass anyway
    x, w = roots_laguerre(n)
    keep = w > 0
    return x[keep], w[keep]


def gauss_legendre(a: float, b: float, n: int):
    x, w = _legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), w * half


def _gauss_jacobi_tail(lo: float, n: int, a: float):
    """Nodes/weights on [lo, 1) for the weight (1 - rho)^a d rho."""
    x, w = _jacobi(n, a)
    scale = 0.5 * (1.0 - lo)
    rho = lo + scale * (x + 1.0)
    return rho, w * scale ** (a + 1.0)


def _trapezoid(n: int):
    theta = 2.0 * math.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * math.pi / n)


def _merged(points: Sequence[float], lo: float, hi: float) -> list[float]:
    pts = sorted(p for p in points if lo + _MERGE < p < hi - _MERGE)
    out = [lo]
    for p in pts:
        if p - out[-1] > _MERGE:
            out.append(p)
    if hi - out[-1] <= _MERGE:
        out.pop()
    out.append(hi)
    return out


def _angular(kinks: Sequence[complex], n_theta: int):
    angles = sorted({float(np.angle(z)) % (2 * math.pi) for z in kinks
                     if 0.0 < abs(z) < math.inf})
    if not angles:
        return _trapezoid(n_theta)
    start = angles[0]
    bps = _merged([a for a in angles[1:]], start, start + 2 * math.pi)
    ths, ws = [], []
    for a, b in zip(bps[:-1], bps[1:]):
        t, w = gauss_legendre(a, b, n_theta)
        ths.append(t)
        ws.append(w)
    return np.concatenate(ths), np.concatenate(ws)


def plane_radius(alpha: float, p: float) -> float:
    """Radius beyond which exp(-p alpha |z|^2 / 2) is below TRUNCATION_LEVEL."""
    return math.sqrt(2.0 * LOG_TRUNCATION / (p * alpha))


def build_rule(
    g: Geometry,
    params=None,
    n_r: int = 256,
    n_theta: int = 32,
    *,
    kinks: Sequence[complex] | None = None,
    radius: float | None = None,
) -> QuadratureRule:
    """Build a product rule for geometry ``g``.

    ``params`` is a space parameter object (anything with ``alpha`` and ``p``
    attributes); the plane uses it for the truncation radius, the disk for
    the Jacobi exponent.  With ``kinks`` given (possibly empty) a paneled
    rule is returned, in which ``n_r`` and ``n_theta`` are per-panel orders.
    """
    if int(n_r) != n_r or int(n_theta) != n_theta or n_r < 1 or n_theta < 1:
        raise ConfigurationError(f"orders must be positive integers, got {n_r}, {n_theta}")
    n_r, n_theta = int(n_r), int(n_theta)
    paneled = kinks is not None
    kinks = [complex(z) for z in (kinks or ())]
    truncation: dict = {}

    if paneled:
        theta, w_theta = _angular(kinks, n_theta)
    else:
        theta, w_theta = _trapezoid(n_theta)

    if g.kind == "sphere":
        if paneled:
            psi_k = [2.0 * math.atan(abs(z)) for z in kinks if abs(z) < math.inf]
            rs, ws = [], []
            for a, b in zip(*_pairs(_merged(psi_k, 0.0, math.pi))):
                psi, w = gauss_legendre(a, b, n_r)
                rs.append(np.tan(0.5 * psi))
                ws.append(w * np.sin(psi) / 2.0)
            r, w_rad = np.concatenate(rs), np.concatenate(ws)
        else:
            s, w = gauss_legendre(0.0, 1.0, n_r)
            r, w_rad = np.sqrt(s / (1.0 - s)), w
        w_rad = w_rad / (2.0 * math.pi)

    elif g.kind == "plane":
        if radius is None:
            if params is None:
                raise ConfigurationError("plane rules need alpha, p or an explicit radius")
            radius = plane_radius(params.alpha, params.p)
        truncation = {"radius": float(radius)}
        if params is not None:
            # (p alpha / 2 pi) * integral of the Gaussian weight outside the disk
            truncation["weight_tail"] = math.exp(-params.p * params.alpha * radius**2 / 2)
        edges = [abs(z) for z in kinks] if paneled else []
        rs, ws = [], []
        for a, b in zip(*_pairs(_merged(edges, 0.0, radius))):
            rr, w = gauss_legendre(a, b, n_r)
            rs.append(rr)
            ws.append(w * rr)
        r, w_rad = np.concatenate(rs), np.concatenate(ws)

    elif g.kind == "hyperbolic":
        if params is None:
            raise ConfigurationError("hyperbolic rules need the weight exponent alpha")
        a_exp = params.alpha - 2.0
        if paneled:
            inner = [abs(z) ** 2 for z in kinks if abs(z) < 1.0]
            rho_tail = max([0.25] + inner)
            rs, gaps, ws = [], [], []
            for a, b in zip(*_pairs(_merged([math.sqrt(v) for v in inner], 0.0,
                                            math.sqrt(rho_tail)))):
                rr, w = gauss_legendre(a, b, n_r)
                rs.append(rr)
                gaps.append((1.0 - rr) * (1.0 + rr))
                ws.append(w * rr / (1.0 - rr**2) ** 2 / math.pi)
            # Gauss-Laguerre in x = -log(1 - rho) >= x0, where dm = e^x dx dtheta / 2pi and
            # the weight (1 - rho)^(alpha - 2) d rho becomes exp(-(alpha - 1) x) dx
            x0 = -math.log1p(-rho_tail)
            rate = params.alpha - 1.0
            y, wy = _laguerre(n_r)
            x = x0 + y / rate
            # beyond x = 700 the node's share is below e^{-(alpha - 1) 700}; 1/gap would overflow
            keep = x < 700.0
            y, wy, x = y[keep], wy[keep], x[keep]
            gap = np.exp(-x)
            rs.append(np.sqrt(-np.expm1(-x)))
            gaps.append(gap)
            # w_k e^{y_k} is the plain-measure weight of the Laguerre rule
            ws.append(np.exp(np.log(wy) + y + x) / (rate * 2.0 * math.pi))
            r, gap, w_rad = np.concatenate(rs), np.concatenate(gaps), np.concatenate(ws)
        else:
            rho, w = _gauss_jacobi_tail(0.0, n_r, a_exp)
            r = np.sqrt(rho)
            gap = 0.5 * (1.0 - _jacobi(n_r, a_exp)[0])
            w_rad = w * gap ** (-params.alpha) / (2.0 * math.pi)
        truncation = {"outermost_gap": float(gap.min())}
    else:  # pragma: no cover
        raise ConfigurationError(f"unknown geometry {g}")

    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (w_rad[:, None] * w_theta[None, :]).ravel()
    gaps = None
    if g.kind == "hyperbolic":
        gaps = np.repeat(gap, theta.size)
    return QuadratureRule(g, nodes, weights, n_r, n_theta, truncation, gaps)


def _pairs(edges):
    return edges[:-1], edges[1:]


def integrate(rule: QuadratureRule, phi: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sum of w_k phi(z_k) with exactly rounded (order-independent) summation."""
    values = np.asarray(phi(rule.nodes), dtype=float)
    if values.shape != rule.nodes.shape:
        values = np.broadcast_to(values, rule.nodes.shape)
    return weighted_sum(rule, values)


def weighted_sum(rule: QuadratureRule, values: np.ndarray) -> float:
    bad = np.flatnonzero(np.isnan(values))
    if bad.size:
        k = int(bad[0])
        raise EvaluationError(f"integrand is NaN at node {k} (z = {rule.nodes[k]!r})")
    terms = rule.weights * values
    if np.isinf(terms).any():
        return float(np.sum(terms))
    return math.fsum(terms)
