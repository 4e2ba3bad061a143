"""Superlevel-set measure mu(t) = |{u >= t}| and the rearrangement u*(s).

The distribution is the weighted empirical step function of the samples
u(z_k) at the quadrature nodes.  Radial functions are constant on whole
rings of nodes, so besides the exact step function there is a smoothed
estimate ``mu_interp`` which puts half of each tie group on either side
of its level and interpolates linearly in between.  That estimate is the
one used when comparing against smooth reference curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .errors import DomainError
from .geometry import Geometry
from .spaces import WeightedFunction, default_rule, u_log_nodes

# samples within this relative distance are treated as one tie group
TIE_RTOL = 1e-11
DISTRIBUTION_ORDER = 1024


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    geometry: Geometry
    values: np.ndarray      # sorted descending, -inf at the tail
    weights: np.ndarray
    cumulative: np.ndarray
    t0: float
    # tie groups: distinct levels (descending), their weights and cumulative masses
    levels: np.ndarray
    level_weights: np.ndarray
    level_cumulative: np.ndarray

    @property
    def total(self) -> float:
        """Total mass captured by the rule (including -inf samples)."""
        return float(self.cumulative[-1])

    @property
    def finite_mass(self) -> float:
        return float(self.level_cumulative[-1]) if self.levels.size else 0.0


def from_samples(geometry: Geometry, values, weights) -> EmpiricalDistribution:
    """Distribution of arbitrary (value, weight) samples; ties kept in input order."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape or values.ndim != 1 or values.size == 0:
        raise DomainError("need matching non-empty 1-d value and weight arrays")
    if np.isnan(values).any() or not np.all(weights > 0):
        raise DomainError("samples must be non-NaN with positive weights")
    order = np.argsort(-values, kind="stable")
    v, w = values[order], weights[order]
    cum = np.cumsum(w)
    finite = np.isfinite(v)
    vf, wf = v[finite], w[finite]
    if vf.size:
        scale = np.maximum(1.0, np.abs(vf))
        new = np.ones(vf.size, bool)
        new[1:] = (vf[:-1] - vf[1:]) > TIE_RTOL * scale[1:]
        starts = np.flatnonzero(new)
        levels = vf[starts]
        lw = np.add.reduceat(wf, starts)
    else:
        levels, lw = np.empty(0), np.empty(0)
    t0 = float(v[0]) if v.size else -math.inf
    for arr in (v, w, cum, levels, lw):
        arr.setflags(write=False)
    lc = np.cumsum(lw)
    lc.setflags(write=False)
    return EmpiricalDistribution(geometry, v, w, cum, t0, levels, lw, lc)


def distribution_rule(f: WeightedFunction, n_r: int | None = None, n_theta: int | None = None
                      ) -> quadrature.QuadratureRule:
    """Dense plain product rule; level sets of non-radial f cut across the node rings,
    so the angular order matters as much as the radial one here."""
    base = default_rule(f, smooth=True)
    return default_rule(f, smooth=True, n_r=n_r or DISTRIBUTION_ORDER,
                        n_theta=n_theta or max(DISTRIBUTION_ORDER, base.angular_order))


def build_distribution(f: WeightedFunction, rule: quadrature.QuadratureRule | None = None
                       ) -> EmpiricalDistribution:
    rule = rule or distribution_rule(f)
    if rule.geometry != f.geometry:
        raise DomainError(f"rule is for {rule.geometry}, function lives on {f.geometry}")
    return from_samples(rule.geometry, u_log_nodes(f, rule), rule.weights)


def mu_at(d: EmpiricalDistribution, t):
    """Right-continuous step function: total weight of samples with value >= t."""
    t = np.asarray(t, dtype=float)
    idx = np.searchsorted(-d.values, -t, side="right")
    out = np.where(idx > 0, d.cumulative[np.maximum(idx - 1, 0)], 0.0)
    return out[()] if out.ndim == 0 else out


def mu_interp(d: EmpiricalDistribution, t):
    """Tie-split estimate of mu: continuous between levels, mid-group at each level."""
    t = np.asarray(t, dtype=float)
    if d.levels.size == 0:
        out = np.zeros(t.shape)
        return out[()] if out.ndim == 0 else out
    mid = d.level_cumulative - 0.5 * d.level_weights
    # np.interp wants increasing abscissae
    out = np.interp(t, d.levels[::-1], mid[::-1], left=d.finite_mass, right=0.0)
    out = np.where(t == d.levels[0], mid[0], out)
    return out[()] if out.ndim == 0 else out


def rearrangement(d: EmpiricalDistribution, s):
    """u*(s) = sup{t : mu(t) < s} for 0 <= s < captured mass."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s >= d.total):
        raise DomainError(f"s must lie in [0, {d.total})")
    # first sample whose cumulative mass reaches s; s = 0 gives t0
    k = np.minimum(np.searchsorted(d.cumulative, s, side="left"), d.values.size - 1)
    out = d.values[k]
    return out[()] if out.ndim == 0 else out


def layer_cake(d: EmpiricalDistribution, phi: Callable[[np.ndarray], np.ndarray],
               upper: float | None = None) -> float:
    """Integral over s in [0, upper] of phi(u*(s)), exact for the step function.

    Without ``upper`` this reproduces the direct quadrature sum of phi(u).
    """
    upper = d.total if upper is None else float(upper)
    lo = d.cumulative - d.weights
    overlap = np.clip(np.minimum(d.cumulative, upper) - lo, 0.0, None)
    keep = overlap > 0
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        vals = np.asarray(phi(d.values[keep]), dtype=float)
    if np.isnan(vals).any():
        raise DomainError("integrand NaN in layer-cake sum")
    terms = overlap[keep] * vals
    if np.isinf(terms).any():
        return float(np.sum(terms))
    return math.fsum(terms)


def window(d: EmpiricalDistribution, mu_floor: float = 1e-3, cap: float = 10.0):
    """t-range on which mu lies between mu_floor and min(captured mass, cap).

    On the sphere the upper end also keeps mu_floor away from the full mass,
    where the samples thin out near the zeros of f.
    """
    top = min(d.finite_mass, cap)
    if d.geometry.total_mass < math.inf:
        top = min(top, d.geometry.total_mass - mu_floor)
    if not mu_floor < top:
        raise DomainError("distribution has too little mass for the requested floor")
    t_hi = float(rearrangement(d, mu_floor))
    t_lo = float(rearrangement(d, top * (1.0 - 1e-9)))
    return t_lo, t_hi


def table(d: EmpiricalDistribution, n: int = 200, mu_floor: float = 1e-3, cap: float = 10.0):
    """(t, mu) pairs on an even t-grid over the window, using the tie-split estimate."""
    t_lo, t_hi = window(d, mu_floor, cap)
    ts = np.linspace(t_hi, t_lo, n)
    return ts, mu_interp(d, ts)
