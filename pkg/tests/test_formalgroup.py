import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ekpolylog.exactnum import embed_padic
from ekpolylog.formalgroup import (
    build_formal_group,
    exact_distinguished_poly,
    exact_torsion_power_sums,
    formal_pi,
    frobenius_congruence_holds,
    newton_power_sums,
    padic_compose_check,
    pi_image,
    power_sum_tail_bound,
    prepare_and_power_sums,
    reduction_lowest_term,
    torsion_power_sums,
)
from ekpolylog.poly import Poly
from ekpolylog.series import TruncSeries as T
from ekpolylog.weierstrass import preset, wp_family


@pytest.fixture(scope="module")
def fg(gauss):
    return build_formal_group(gauss, 44)


@pytest.fixture(scope="module")
def fpi(fg, split13):
    return formal_pi(fg, split13, 8, 40, check_through=20)


@pytest.mark.parametrize("name", ["gauss", "hex", "generic"])
def test_parameter_normalization_and_curve_equation(name):
    c = preset(name)
    f = build_formal_group(c, 16)
    assert f.x.coeff(-2) == 1 and (f.x * T({2: 1}, f.x.order)).coeff(0) == 1
    assert f.y.coeff(-3) == -2
    M = min(f.x.order, f.y.order) - 6
    lhs = f.y * f.y
    rhs = f.x * f.x * f.x * 4 - f.x * c.g2 - c.g3
    assert lhs.agrees_with(rhs, M)
    assert (f.x * (-2)).agrees_with(T({1: 1}, 30) * f.y, M)


@pytest.mark.parametrize("name", ["gauss", "hex"])
def test_logarithm_inverts_the_uniformizer(name):
    """lambda(s(z)) = z with s(z) = -2 wp(z)/wp'(z) computed on the z side."""
    c = preset(name)
    fam = wp_family(c, 20)
    s_of_z = (fam.wp * (-2) / fam.dwp).truncate(14)
    f = build_formal_group(c, 14)
    assert f.lam.compose(s_of_z).agrees_with(T({1: 1}, 14), 12)
    assert f.lam.derivative().agrees_with(f.dlam, 10)


def test_group_law_basics(fg):
    G = fg.group_law((6, 6))
    assert G.coeff(1, 0) == 1 and G.coeff(0, 1) == 1
    assert all(G.coeff(k, 0) == 0 for k in range(2, 6))
    assert G.transpose() == G


def test_formal_pi_linear_term_and_congruence(fpi, split13, fg):
    lin = fpi.series.coeff(1)
    assert (lin - pi_image(split13, lin.absprec)).is_zero()
    assert frobenius_congruence_holds(fpi, 20)
    assert reduction_lowest_term(fpi) == 13
    assert padic_compose_check(fg, fpi, 30)


def test_formal_pi_of_one_is_identity(fg, split13):
    one = formal_pi(fg, dataclasses.replace(split13, pi=1), 8, 20, check_through=0)
    assert one.series.coeff(1) == 1
    assert all(a.is_zero() for k, a in one.series.c.items() if k != 1)


def test_prepared_power_sums_match_exact(gauss, split13, fpi):
    dp = prepare_and_power_sums(fpi.series, 8)
    assert dp.degree == 13
    assert dp.power_sums[0] == 13
    exact = exact_torsion_power_sums(gauss, split13, 8)
    for k in range(1, 9):
        d = dp.power_sums[k] - embed_padic(exact[k], split13, dp.precision)
        assert d.with_absprec(dp.precision).is_zero()


def test_exact_distinguished_polynomial(gauss, split13):
    P = exact_distinguished_poly(gauss, split13)
    assert P.deg == 13 and P.lc == 1
    ps = newton_power_sums(P.c, 8)
    assert ps == exact_torsion_power_sums(gauss, split13, 8)


def test_padic_power_sum_valuations(gauss, split13):
    ps = torsion_power_sums(gauss, split13, 24, 10)
    for k in range(1, 25):
        if not ps[k].is_zero():
            assert ps[k].valuation() >= -(-k // 12)


@given(st.lists(st.integers(-7, 7), min_size=1, max_size=6), st.integers(1, 10))
def test_newton_power_sums_against_roots(roots, cutoff):
    P = Poly([Fraction(1)])
    for r in roots:
        P = P * Poly([Fraction(-r), Fraction(1)])
    ps = newton_power_sums(P.c, cutoff)
    assert ps == [sum(Fraction(r) ** k for r in roots) for k in range(cutoff + 1)]


@given(st.integers(14, 200), st.integers(0, 4))
def test_tail_bound_is_monotone_in_order(order, m):
    assert power_sum_tail_bound(order + 13, 13, 13, m) >= power_sum_tail_bound(order, 13, 13, m)
