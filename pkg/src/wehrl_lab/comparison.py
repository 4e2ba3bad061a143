"""The comparison ODE g'(t) = -H(g) / (c g) and the checks built on it.

Because H(x) / x = 4 pi (1 - k x), the equation is linear in g and every
solution has a closed form.  The numeric solver is kept independent of
those forms so the two can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate as sp_integrate

from . import distribution as dist
from .errors import DomainError, InconsistencyError, StepSizeUnderflow
from .geometry import Geometry, profile_unchecked
from .spaces import SpaceParams

DISTRIBUTION_TOL = 5e-3
RK_RTOL = 1e-11


@dataclass(frozen=True)
class ComparisonCurve:
    """Extremal distribution mu0 for a space, with t0 = 0."""

    geometry: Geometry
    c: float

    @property
    def rate(self) -> float:
        return 4.0 * math.pi / self.c

    def mu0(self, t):
        """Closed form, extended by 0 for t >= 0."""
        t = np.asarray(t, dtype=float)
        tm = np.minimum(t, 0.0)
        k = self.geometry.profile_sign
        if k == 1:
            out = -np.expm1(self.rate * tm)
        elif k == 0:
            out = -self.rate * tm
        else:
            out = np.expm1(-self.rate * tm)
        return out[()] if out.ndim == 0 else out

    def inverse(self, s):
        """t with mu0(t) = s, for 0 <= s < total mass."""
        s = np.asarray(s, dtype=float)
        k = self.geometry.profile_sign
        if np.any(s < 0) or (k == 1 and np.any(s >= 1.0)):
            raise DomainError("measure outside the range of mu0")
        if k == 1:
            out = np.log1p(-s) / self.rate
        elif k == 0:
            out = -s / self.rate
        else:
            out = -np.log1p(s) / self.rate
        return out[()] if out.ndim == 0 else out

    def through(self, t2: float, mu2: float):
        """Solution of the ODE with g(t2) = mu2, as a callable of t."""
        return lambda t: general_solution(self.geometry, self.c, t2, mu2, t)


def general_solution(g: Geometry, c: float, t2: float, mu2: float, t):
    t = np.asarray(t, dtype=float)
    rate = 4.0 * math.pi / c
    k = g.profile_sign
    if k == 1:
        out = 1.0 - (1.0 - mu2) * np.exp(rate * (t - t2))
    elif k == 0:
        out = mu2 + rate * (t2 - t)
    else:
        out = (1.0 + mu2) * np.exp(rate * (t2 - t)) - 1.0
    return out[()] if out.ndim == 0 else out


def mu0(space: SpaceParams) -> ComparisonCurve:
    return ComparisonCurve(space.geometry, space.c)


# -- Dormand-Prince 5(4) -------------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _dopri(rhs, t_start: float, y: float, t_end: float, rtol: float, max_step: float) -> float:
    span = t_end - t_start
    direction = math.copysign(1.0, span)
    t = t_start
    h = direction * min(abs(span), max_step) / 4.0
    k1 = rhs(t, y)
    while direction * (t_end - t) > 0:
        if direction * (t + h - t_end) > 0:
            h = t_end - t
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(rhs(t + _C[i] * h, yi))
        y_new = y + h * sum(b * k for b, k in zip(_B5, ks))
        err = abs(h * sum(e * k for e, k in zip(_E, ks)))
        scale = rtol * max(abs(y), abs(y_new)) + 1e-300
        ratio = err / scale
        if ratio <= 1.0:
            t, y = t + h, y_new
            k1 = ks[6]
        factor = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
        h = direction * min(abs(h) * factor, max_step)
        if abs(h) < 1e-14 * max(1.0, abs(t)) and direction * (t_end - t) > abs(h):
            raise StepSizeUnderflow(f"step size underflow at t = {t}")
    return y


def solve_backward(g: Geometry, c: float, t2: float, mu2: float, t1: float) -> float:
    """D(t1, t2, mu2): value at t1 of the ODE solution through (t2, mu2)."""
    if not c > 0:
        raise DomainError("c must be positive")
    if not (0.0 < mu2 < g.total_mass):
        raise DomainError(f"mu2 = {mu2} outside (0, {g.total_mass})")
    if t1 > t2:
        raise DomainError("need t1 <= t2")
    if t1 == t2:
        return float(mu2)

    def rhs(_t, y):
        return -profile_unchecked(g, y) / (c * y)

    return _dopri(rhs, t2, float(mu2), t1, RK_RTOL, (t2 - t1) / 50.0)


# -- checks ---------------------------------------------------------------------


def normalization_check(space: SpaceParams) -> float:
    """C * integral over t < 0 of p e^{pt} mu0(t); equals 1 for the right constant."""
    curve = mu0(space)
    p, const = space.p, space.norm_constant

    def integrand(t):
        x = math.exp(p * t)
        # far out mu0 may overflow where e^{pt} has already underflowed
        return 0.0 if x == 0.0 else p * x * float(curve.mu0(t))

    with np.errstate(over="ignore"):
        val, _ = sp_integrate.quad(integrand, -np.inf, 0.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return const * val


@dataclass(frozen=True)
class MonotonicityRecord:
    t1: float
    t2: float
    mu_t2: float
    D: float
    mu_t1: float
    margin: float
    passed: bool

    def as_dict(self) -> dict:
        return {"t1": self.t1, "t2": self.t2, "mu_t2": self.mu_t2, "D": self.D,
                "mu_t1": self.mu_t1, "margin": self.margin, "pass": self.passed}


def check_monotonicity(d: dist.EmpiricalDistribution, g: Geometry, c: float,
                       t_pairs: Sequence[tuple[float, float]],
                       tol: float = DISTRIBUTION_TOL) -> list[MonotonicityRecord]:
    """D(t1, t2, mu(t2)) <= mu(t1) for each pair, with the tie-split mu estimate.

    The tolerance is absolute up to unit measure and relative above it.
    """
    if not len(t_pairs):
        raise DomainError("no (t1, t2) pairs given")
    out = []
    for t1, t2 in t_pairs:
        if not (t1 < t2 < d.t0):
            raise DomainError(f"pair ({t1}, {t2}) must satisfy t1 < t2 < t0 = {d.t0}")
        m2 = float(dist.mu_interp(d, t2))
        m1 = float(dist.mu_interp(d, t1))
        if not m2 > 0:
            raise DomainError(f"mu(t2) = 0 at t2 = {t2}")
        m2 = min(m2, math.nextafter(g.total_mass, 0.0))
        D = solve_backward(g, c, t2, m2, t1)
        margin = m1 - D
        out.append(MonotonicityRecord(t1, t2, m2, D, m1, margin, margin >= -tol * max(1.0, m1)))
    return out


def random_pairs(d: dist.EmpiricalDistribution, rng: np.random.Generator, n: int = 20,
                 mu_floor: float = 1e-3, cap: float = 10.0) -> list[tuple[float, float]]:
    """n pairs t1 < t2 inside the window where mu(t2) >= mu_floor."""
    t_lo, t_hi = dist.window(d, mu_floor, cap)
    pairs = []
    for _ in range(n):
        t2 = rng.uniform(t_lo, t_hi)
        t1 = rng.uniform(t_lo, t2)
        pairs.append((float(t1), float(t2)))
    return pairs


@dataclass(frozen=True)
class SlopeRecord:
    t: float
    slope: float
    rhs: float
    passed: bool


def check_diff_inequality(d: dist.EmpiricalDistribution, g: Geometry, c: float,
                          t_grid=None, mu_floor: float = 1e-3, cap: float = 10.0,
                          tol: float = DISTRIBUTION_TOL) -> list[SlopeRecord]:
    """mu'(t) <= -H(mu) / (c mu) on a grid, slopes taken over h = (t0 - t_min) / 500.

    The slope is the central difference of the tie-split estimate of mu,
    which is already continuous and piecewise linear.  An error of size
    ``tol * max(1, mu)`` in mu moves that slope by up to tol * max(1, mu) / h,
    and that is the allowance.
    """
    t_lo, t_hi = dist.window(d, mu_floor, cap)
    h = (d.t0 - t_lo) / 500.0
    if t_grid is None:
        t_grid = np.linspace(t_lo + h, t_hi - h, 200)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < t_lo) or np.any(t_grid > d.t0):
        raise DomainError("grid points outside the distribution's support window")
    mus = dist.mu_interp(d, t_grid)
    if np.any(mus < mu_floor):
        raise DomainError(f"grid points with mu below the floor {mu_floor}")
    slope = (dist.mu_interp(d, t_grid + h) - dist.mu_interp(d, t_grid - h)) / (2.0 * h)
    rhs = -profile_unchecked(g, mus) / (c * mus)
    allowance = tol * np.maximum(1.0, mus) / h
    return [SlopeRecord(float(t), float(sl), float(r), bool(sl <= r + a))
            for t, sl, r, a in zip(t_grid, slope, rhs, allowance)]


@dataclass(frozen=True)
class CrossingResult:
    identical: bool
    t1: float | None
    sup_gap: float

    def describe(self):
        return "identical" if self.identical else self.t1


def distance_to_mu0(d: dist.EmpiricalDistribution, curve: ComparisonCurve, n: int = 2000,
                    cap: float = 10.0) -> float:
    """sup over the comparison window of |mu - mu0| / max(1, mu0) (tie-split estimate)."""
    ts, gap, m0 = _gap(d, curve, n, cap)
    return float(np.max(np.abs(gap) / np.maximum(1.0, m0)))


def _gap(d, curve, n, cap):
    top = min(d.finite_mass, cap, curve.geometry.total_mass)
    t_lo = float(curve.inverse(top * (1 - 1e-9)))
    t_hi = max(0.0, d.t0) + 1e-9
    ts = np.linspace(t_lo, t_hi, n)
    m = dist.mu_interp(d, ts)
    m0 = curve.mu0(ts)
    return ts, m - m0, m0


def single_crossing(d: dist.EmpiricalDistribution, curve: ComparisonCurve,
                    band: float = DISTRIBUTION_TOL, n: int = 2000, cap: float = 10.0
                    ) -> CrossingResult:
    """Locate the unique t1 where mu - mu0 goes from positive to negative.

    Points within ``band * max(1, mu0)`` of zero are neutral.  Returns
    ``identical`` when every point is neutral.
    """
    ts, gap, m0 = _gap(d, curve, n, cap)
    tol = band * np.maximum(1.0, m0)
    signs = np.where(gap > tol, 1, np.where(gap < -tol, -1, 0))
    sup = float(np.max(np.abs(gap) / np.maximum(1.0, m0)))
    nz = np.flatnonzero(signs)
    if nz.size == 0:
        return CrossingResult(True, None, sup)
    seq = signs[nz]
    changes = np.flatnonzero(seq[1:] != seq[:-1])
    if changes.size > 1 or (changes.size == 1 and seq[0] == -1):
        raise InconsistencyError(
            f"mu - mu0 changes sign {changes.size} times (pattern starts with {seq[0]:+d}); "
            "the distribution is probably under-resolved"
        )
    if changes.size == 1:
        a, b = nz[changes[0]], nz[changes[0] + 1]
    elif seq[0] == 1:
        a, b = nz[-1], min(nz[-1] + 1, ts.size - 1)
    else:
        a, b = max(nz[0] - 1, 0), nz[0]
    return CrossingResult(False, float(0.5 * (ts[a] + ts[b])), sup)
