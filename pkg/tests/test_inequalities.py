import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wehrl_lab import distribution as dist, inequalities as ineq
from wehrl_lab.errors import ConfigurationError, DomainError, ResolutionError
from wehrl_lab.geometry import HYPERBOLIC, PLANE, SPHERE, measure_density
from wehrl_lab.spaces import Bergman, Fock, SpherePoly, coherent_state, random_function


# -- weights ------------------------------------------------------------------------


def test_parse_weight_tokens():
    assert isinstance(ineq.parse_weight("power:2"), ineq.Power)
    assert ineq.parse_weight("power:2.5").s == 2.5
    assert isinstance(ineq.parse_weight("xlogx"), ineq.XLogX)
    assert ineq.parse_weight("hinge:0.3").lam == 0.3
    for bad in ("power:x", "hinge", "cube", "xlogx:2", "hinge:1.5", "power:0.5"):
        with pytest.raises((ConfigurationError, DomainError)):
            ineq.parse_weight(bad)


def test_weights_vanish_at_zero_and_are_convex():
    for G in (ineq.Power(1), ineq.Power(3), ineq.XLogX(), ineq.Hinge(0.4),
              ineq.Tabulated([0, 0.5, 1, 2], [0, 0.1, 0.5, 2])):
        assert G(0.0) == 0.0
        assert G.check_convex(upper=2.0)


def test_tabulated_rejects_concave_data():
    with pytest.raises(ConfigurationError):
        ineq.Tabulated([0, 1, 2], [0, 1, 1.5])
    with pytest.raises(ConfigurationError):
        ineq.Tabulated([0.1, 1], [0, 1])


def test_positivity_flags():
    assert ineq.Power(2).positive
    assert not ineq.XLogX().positive
    assert not ineq.Hinge(0.5).positive


# -- right-hand sides: closed forms ----------------------------------------------


@pytest.mark.parametrize("j,p", [(1, 2.0), (4, 2.0), (3, 1.0)])
@pytest.mark.parametrize("s", [1.0, 2.0, 3.5])
def test_sphere_power_rhs(j, p, s):
    a = p * j / 2
    assert ineq.global_rhs(SpherePoly(j, p), ineq.Power(s)) == pytest.approx(1 / (s * a + 1), rel=1e-11)


@pytest.mark.parametrize("alpha,p", [(1.0, 2.0), (math.pi, 1.0)])
@pytest.mark.parametrize("s", [1.0, 2.0])
def test_plane_power_rhs(alpha, p, s):
    expected = 2 * math.pi / (s * p * alpha)
    assert ineq.global_rhs(Fock(alpha, p), ineq.Power(s)) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize("alpha", [2.0, 3.5])
@pytest.mark.parametrize("s", [1.0, 2.0])
def test_disk_power_rhs(alpha, s):
    expected = 1 / (s * alpha - 1)
    assert ineq.global_rhs(Bergman(alpha, 2.0), ineq.Power(s)) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize("j", range(1, 9))
def test_sphere_xlogx_rhs(j):
    assert ineq.global_rhs(SpherePoly(j), ineq.XLogX()) == pytest.approx(-j / (j + 1) ** 2, rel=1e-11)


@pytest.mark.parametrize("space", [SpherePoly(3), Fock(2.0, 3.0), Bergman(3.0), Bergman(2.0, 1.0)])
@pytest.mark.parametrize("G", [ineq.Power(2), ineq.XLogX(), ineq.Hinge(0.3)])
def test_rhs_forms_agree(space, G):
    assert ineq.global_rhs(space, G) == pytest.approx(ineq.global_rhs_t_form(space, G),
                                                      rel=1e-9, abs=1e-12)


def test_faber_krahn_rhs_closed_form():
    space = Fock(math.pi, 2.0)
    assert ineq.faber_krahn_rhs(space, ineq.Power(1), 1.0) == pytest.approx(1 - math.exp(-1.0))
    with pytest.raises(DomainError):
        ineq.faber_krahn_rhs(space, ineq.XLogX(), 1.0)
    with pytest.raises(DomainError):
        ineq.faber_krahn_rhs(SpherePoly(2), ineq.Power(1), 1.5)


# -- left-hand sides -----------------------------------------------------------------


@pytest.mark.parametrize("space,des", [(SpherePoly(2), (0.3, 0.3 ** 0.5 * 0.9j + 0.1)),
                                       (Fock(1.5, 3.0), 0.2 + 0.5j), (Bergman(2.5), 0.4)])
@pytest.mark.parametrize("G", [ineq.Power(1), ineq.Power(2), ineq.XLogX()])
def test_coherent_states_attain_global_bound(space, des, G):
    if isinstance(space, SpherePoly):
        a, b = des
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        des = (a / n, b / n)
    rep = ineq.verify_global(coherent_state(space, des), G)
    assert rep.lhs == pytest.approx(rep.rhs, abs=1e-9)
    assert rep.passed
    assert rep.equality_diagnostic < 5e-3


@pytest.mark.parametrize("space", [SpherePoly(4, 1.0), Fock(2.0), Bergman(3.0, 2.0)])
def test_random_functions_satisfy_global_bound(space):
    rng = np.random.default_rng(21)
    for _ in range(3):
        f = random_function(space, rng)
        for G in (ineq.Power(2), ineq.XLogX(), ineq.Hinge(0.2)):
            rep = ineq.verify_global(f, G)
            assert rep.passed, rep.as_dict()
        assert ineq.verify_global(f, ineq.Power(2)).equality_diagnostic > 5e-3


def test_unnormalized_input_rejected():
    f = random_function(Fock(1.0), np.random.default_rng(0), normalized=False).scaled(3.0)
    with pytest.raises(DomainError):
        ineq.functional_lhs(f, ineq.Power(2))


def test_wehrl_entropy_of_coherent_states():
    for j in range(1, 9):
        assert ineq.wehrl_entropy(coherent_state(SpherePoly(j))) == pytest.approx(j / (j + 1), abs=1e-12)
    with pytest.raises(DomainError):
        ineq.wehrl_entropy(coherent_state(Fock(1.0)))


def test_wehrl_report_fields():
    rep = ineq.verify_wehrl(coherent_state(SpherePoly(4), (1, 0)))
    d = rep.as_dict()
    assert d["lhs"] == pytest.approx(0.8) and d["pass"]
    assert d["inequality"] == "wehrl" and d["space"]["geometry"] == "sphere"


def test_report_margin_for_double_divergence():
    rep = ineq.VerificationReport("global", {}, {}, -math.inf, -math.inf, 1e-6)
    assert rep.margin == 0.0 and rep.passed


def test_contractivity():
    rng = np.random.default_rng(2)
    f = random_function(SpherePoly(3, 2.0), rng)
    rep = ineq.verify_contractivity(f, 2.0, 4.0)
    assert rep.passed and rep.lhs < rep.rhs
    with pytest.raises(DomainError):
        ineq.verify_contractivity(f, 4.0, 2.0)
    with pytest.raises(DomainError):
        ineq.verify_contractivity(random_function(Bergman(3.0), rng), 2.0, 4.0)


# -- local bound ---------------------------------------------------------------------


@pytest.mark.parametrize("g,center,measure", [(SPHERE, 0.3 + 0.2j, 0.3), (PLANE, -1 + 0.5j, 2.0),
                                              (HYPERBOLIC, 0.4j, 0.7)])
def test_geodesic_disk_has_requested_measure(g, center, measure):
    disk = ineq.geodesic_disk(g, center, measure)

    def ring(r, th):
        z = disk.center + r * np.exp(1j * th)
        return r * measure_density(g, z)

    area, _ = integrate.dblquad(ring, 0, 2 * math.pi, 0, disk.radius, epsabs=1e-11)
    assert area == pytest.approx(measure, rel=1e-8)


def test_geodesic_disk_centered_at_origin():
    assert ineq.geodesic_disk(PLANE, 0, math.pi).radius == pytest.approx(1.0)
    assert ineq.geodesic_disk(SPHERE, 0, 0.5).radius == pytest.approx(1.0)
    assert ineq.geodesic_disk(HYPERBOLIC, 0, 1.0).radius == pytest.approx(math.sqrt(0.5))


def test_superlevel_region_of_coherent_state_is_sharp():
    f = coherent_state(Fock(math.pi, 2.0))
    region = ineq.best_region(f, 1.0)
    rep = ineq.verify_local(f, region, ineq.Power(1))
    assert rep.lhs == pytest.approx(1 - math.exp(-1), abs=1e-4)
    assert rep.extra["region"]["superlevel"]["budget"] == 1.0


def test_tiny_disk_is_unresolved():
    f = coherent_state(Fock(1.0))
    rule = dist.distribution_rule(f, 16, 16)
    with pytest.raises(ResolutionError):
        ineq.local_lhs(f, ineq.Disk(0.3 + 0.3j, 1e-4), ineq.Power(1), rule)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.6))
def test_disks_never_beat_the_bound(seed, measure):
    space = SpherePoly(3)
    rng = np.random.default_rng(seed)
    f = random_function(space, rng)
    disk = ineq.random_disk(SPHERE, measure, rng)
    rep = ineq.verify_local(f, disk, ineq.Power(2), dist.distribution_rule(f, 256, 256))
    assert rep.passed
