import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wehrl_lab import comparison, distribution as dist
from wehrl_lab.errors import DomainError
from wehrl_lab.geometry import HYPERBOLIC, PLANE, SPHERE, profile_unchecked
from wehrl_lab.spaces import Bergman, Fock, SpherePoly, coherent_state, random_function

SPACES = [SpherePoly(3), Fock(2.0), Bergman(3.0), Bergman(2.5, 1.0), SpherePoly(5, 1.0)]


@pytest.mark.parametrize("space", SPACES)
def test_mu0_closed_forms(space):
    curve = comparison.mu0(space)
    t = -0.37
    if isinstance(space, SpherePoly):
        expected = 1 - math.exp(2 * t / space.j)
    elif isinstance(space, Fock):
        expected = -2 * math.pi * t / space.alpha
    else:
        expected = math.exp(-space.p * t / space.alpha) - 1
    assert curve.mu0(t) == pytest.approx(expected, rel=1e-14)
    assert curve.mu0(0.5) == 0.0
    assert curve.inverse(curve.mu0(t)) == pytest.approx(t, rel=1e-13)


@pytest.mark.parametrize("space", SPACES)
def test_mu0_solves_the_ode(space):
    curve = comparison.mu0(space)
    h = 1e-6
    for t in (-0.05, -0.4, -1.3):
        slope = (curve.mu0(t + h) - curve.mu0(t - h)) / (2 * h)
        m = curve.mu0(t)
        assert slope == pytest.approx(-profile_unchecked(space.geometry, m) / (space.c * m), rel=1e-7)


@pytest.mark.parametrize("space", SPACES)
def test_normalization_identity(space):
    assert comparison.normalization_check(space) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([SPHERE, PLANE, HYPERBOLIC]), st.floats(1.0, 60.0),
       st.floats(-3.0, 0.0), st.floats(0.01, 3.0), st.floats(0.001, 0.99))
def test_solver_matches_general_solution(g, c, t2, dt, mu2):
    t1 = t2 - dt
    got = comparison.solve_backward(g, c, t2, mu2, t1)
    exact = comparison.general_solution(g, c, t2, mu2, t1)
    assert got == pytest.approx(exact, rel=1e-9)


def test_solver_identity_at_same_time():
    assert comparison.solve_backward(PLANE, 4.0, -1.0, 0.3, -1.0) == 0.3


def test_monotonicity_on_coherent_and_random():
    for space in (SpherePoly(3), Fock(1.0), Bergman(3.0)):
        for f in (coherent_state(space), random_function(space, np.random.default_rng(5))):
            d = dist.build_distribution(f)
            pairs = comparison.random_pairs(d, np.random.default_rng(1), 10)
            recs = comparison.check_monotonicity(d, space.geometry, space.c, pairs)
            assert all(r.passed for r in recs)
            assert set(recs[0].as_dict()) == {"t1", "t2", "mu_t2", "D", "mu_t1", "margin", "pass"}


def test_monotonicity_pair_order_enforced():
    d = dist.build_distribution(coherent_state(Fock(1.0)))
    with pytest.raises(DomainError):
        comparison.check_monotonicity(d, PLANE, 2.0, [(-0.1, -0.5)])
    with pytest.raises(DomainError):
        comparison.check_monotonicity(d, PLANE, 2.0, [])


def test_differential_inequality_holds():
    for space in (SpherePoly(2), Fock(2.0), Bergman(4.0)):
        f = random_function(space, np.random.default_rng(9))
        d = dist.build_distribution(f)
        recs = comparison.check_diff_inequality(d, space.geometry, space.c)
        assert all(r.passed for r in recs)


def test_single_crossing_classification():
    space = Fock(2.0)
    curve = comparison.mu0(space)
    res = comparison.single_crossing(dist.build_distribution(coherent_state(space, 0.2)), curve)
    assert res.identical and res.describe() == "identical"
    f = random_function(space, np.random.default_rng(4))
    res = comparison.single_crossing(dist.build_distribution(f), curve)
    assert not res.identical and res.t1 < 0


def test_distance_to_mu0_detects_non_coherent():
    space = SpherePoly(3)
    f = random_function(space, np.random.default_rng(8))
    assert comparison.distance_to_mu0(dist.build_distribution(f), comparison.mu0(space)) > 1e-2
