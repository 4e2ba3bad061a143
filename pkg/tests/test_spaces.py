import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wehrl_lab.errors import DomainError
from wehrl_lab.spaces import (Bergman, Fock, SpherePoly, coherent_state, default_rule,
                              mobius_isometry, monomial_norms, normalize, p_norm, polynomial,
                              random_function, random_su2, sup_weighted_modulus, u_log,
                              weighted_modulus)


def test_parameter_validation():
    with pytest.raises(DomainError):
        SpherePoly(-1)
    with pytest.raises(DomainError):
        SpherePoly(2.5)
    with pytest.raises(DomainError):
        Fock(0.0)
    with pytest.raises(DomainError):
        Bergman(1.0)
    with pytest.raises(DomainError):
        Fock(1.0, p=0.0)


def test_constants():
    assert SpherePoly(4, 2.0).norm_constant == 5.0
    assert SpherePoly(4, 2.0).c == pytest.approx(8 * math.pi)
    assert Fock(math.pi, 2.0).norm_constant == pytest.approx(1.0)
    assert Fock(3.0).c == 6.0
    assert Bergman(3.0, 2.0).norm_constant == 2.0
    assert Bergman(3.0, 2.0).c == pytest.approx(6 * math.pi)


@pytest.mark.parametrize("space", [SpherePoly(1), SpherePoly(5), Fock(0.7), Fock(2.0),
                                   Bergman(2.0), Bergman(3.5)])
def test_monomial_norms_match_quadrature(space):
    deg = space.j if isinstance(space, SpherePoly) else 4
    norms = monomial_norms(space, deg)
    for k in range(deg + 1):
        c = np.zeros(k + 1)
        c[k] = 1.0
        assert p_norm(polynomial(space, c)) == pytest.approx(norms[k], rel=1e-11)


@pytest.mark.parametrize("space,designation", [
    (SpherePoly(3), (0.6, 0.8j)),
    (SpherePoly(7), (1.0, 0.0)),
    (Fock(1.5), 0.4 - 0.3j),
    (Bergman(2.5), 0.5j),
])
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_coherent_states_have_unit_norm(space, designation, p):
    space = type(space)(*(space.j,) if isinstance(space, SpherePoly) else (space.alpha,), p=p)
    f = coherent_state(space, designation)
    assert p_norm(f) == pytest.approx(1.0, abs=1e-11)


def test_coherent_sup_equals_norm():
    for space, des in [(SpherePoly(4), (0.6, 0.8)), (Fock(2.0), 0.3 + 0.1j), (Bergman(3.0), 0.2)]:
        value, where = sup_weighted_modulus(coherent_state(space, des))
        assert value == pytest.approx(1.0, abs=1e-9)


def test_sphere_sup_at_infinity():
    f = polynomial(SpherePoly(2), [0, 0, 1.0])
    value, where = sup_weighted_modulus(f)
    assert value == pytest.approx(1.0)
    assert math.isinf(abs(where))


def test_u_log_at_infinity_uses_top_coefficient():
    f = polynomial(SpherePoly(3), [1.0, 2.0, 0.5, -4.0])
    assert u_log(f, complex(math.inf, 0)) == pytest.approx(math.log(4.0))
    big = 1e6
    assert u_log(f, big) == pytest.approx(math.log(4.0), abs=1e-5)


def test_weighted_modulus_of_constant():
    f = polynomial(Fock(2.0), [1.0])
    z = 0.3 + 0.4j
    assert weighted_modulus(f, z) == pytest.approx(math.exp(-0.25))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([1.0, 2.0, 3.0]))
def test_mobius_isometry_preserves_norm(seed, p):
    rng = np.random.default_rng(seed)
    space = SpherePoly(4, p)
    f = random_function(space, rng, normalized=False)
    g = polynomial(space, mobius_isometry(space, random_su2(rng), f.coeffs))
    assert p_norm(g) == pytest.approx(p_norm(f), rel=1e-9)


def test_mobius_rejects_non_unit_pair():
    with pytest.raises(DomainError):
        mobius_isometry(SpherePoly(2), (1.0, 1.0), [1.0])


@pytest.mark.parametrize("space", [SpherePoly(3), Fock(1.0), Bergman(2.0)])
def test_parseval_for_p2(space):
    rng = np.random.default_rng(11)
    f = random_function(space, rng, normalized=False)
    expected = math.sqrt(np.sum(np.abs(f.coeffs) ** 2 * monomial_norms(space, f.degree) ** 2))
    assert p_norm(f) == pytest.approx(expected, rel=1e-12)


def test_random_function_normalized_and_reproducible():
    for space in (SpherePoly(5, 1.0), Fock(2.0, 3.0), Bergman(3.0, 2.0)):
        a = random_function(space, np.random.default_rng(3))
        b = random_function(space, np.random.default_rng(3))
        assert np.array_equal(a.coeffs, b.coeffs)
        assert p_norm(a) == pytest.approx(1.0, abs=1e-7)


def test_zero_function_rejected():
    with pytest.raises(DomainError):
        normalize(polynomial(SpherePoly(2), [0, 0, 0]))
    with pytest.raises(DomainError):
        p_norm(polynomial(Fock(1.0), [0.0]))


def test_degree_bound_on_sphere():
    with pytest.raises(DomainError):
        polynomial(SpherePoly(1), [1, 2, 3])


def test_bergman_coherent_is_tied_to_p():
    f = coherent_state(Bergman(3.0, 2.0), 0.3)
    with pytest.raises(DomainError):
        f.with_p(1.0)


def test_default_rule_orders():
    f = random_function(SpherePoly(6), np.random.default_rng(0))
    rule = default_rule(f, smooth=True)
    assert (rule.radial_order, rule.angular_order) == (256, 2 * 6 + 16)
    custom = default_rule(f, smooth=True, n_r=40, n_theta=30)
    assert (custom.radial_order, custom.angular_order) == (40, 30)
