from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from ekpolylog.errors import ConfigError, TowerTooDeep
from ekpolylog.exactnum import QQ
from ekpolylog.kronecker import connection_map
from ekpolylog.series import TruncSeries as T
from ekpolylog.weierstrass import (
    CurveData,
    algebraize,
    cm_unit_action,
    curve_add,
    curve_mul,
    curve_neg,
    division_polynomial,
    f1p_rational,
    on_curve,
    parse_presets,
    pi_isogeny,
    preset,
    select_point,
    sigma_series,
    torsion_points,
    translate_wp,
    weierstrass_ode_residual,
    wp_family,
)

small = st.fractions(min_value=-6, max_value=6, max_denominator=5)


def curve_through(g2, x, y):
    """Curve y^2 = 4x^3 - g2 x - g3 passing through (x, y)."""
    g3 = 4 * x ** 3 - g2 * x - y * y
    assume(g2 ** 3 - 27 * g3 ** 2 != 0)
    return CurveData(g2, g3), (x, y)


def taylor_translate_oracle(c, x0, y0, M):
    """u(z) = wp(z + z0) from u'' = 6u^2 - g2/2, u(0) = x0, u'(0) = y0."""
    u = [Fraction(x0), Fraction(y0)]
    for n in range(M - 2):
        conv = sum(u[i] * u[n - i] for i in range(n + 1))
        rhs = 6 * conv - (Fraction(c.g2, 2) if n == 0 else 0)
        u.append(rhs / ((n + 2) * (n + 1)))
    return u


@given(small, small)
def test_sigma_low_coefficients(g2, g3):
    assume(g2 ** 3 - 27 * g3 ** 2 != 0)
    s = sigma_series(CurveData(g2, g3), 9)
    assert s.coeff(1) == 1 and s.coeff(3) == 0
    assert s.coeff(5) == -g2 / 240
    assert s.coeff(7) == -g3 / 840


@given(small, small)
def test_wp_laurent_and_ode(g2, g3):
    assume(g2 ** 3 - 27 * g3 ** 2 != 0)
    c = CurveData(g2, g3)
    fam = wp_family(c, 10)
    assert fam.wp.coeff(-2) == 1 and fam.wp.coeff(0) == 0
    assert fam.wp.coeff(2) == g2 / 20
    assert fam.wp.coeff(4) == g3 / 28
    assert weierstrass_ode_residual(c, 16).is_zero()


def test_F1_is_odd_without_e2star():
    F1 = wp_family(preset("generic"), 12).F1
    assert all(k % 2 for k in F1.c)


def test_group_law_examples(gauss):
    assert curve_add(gauss, (1, 0), None) == (1, 0)
    assert curve_add(gauss, (1, 0), (1, 0)) is None
    assert curve_add(gauss, (0, 0), (1, 0)) == (-1, 0)


@given(small, small, st.fractions(min_value=-6, max_value=6, max_denominator=5).filter(lambda y: y != 0))
def test_group_law_properties(g2, x, y):
    c, P = curve_through(g2, x, y)
    P2 = curve_add(c, P, P)
    assume(P2 is not None)
    assert on_curve(c, P2)
    assert curve_add(c, P, curve_neg(P)) is None
    P3 = curve_add(c, P2, P)
    assert P3 == curve_add(c, P, P2)
    assert P3 == curve_mul(c, 3, P)
    if P3 is not None:
        assert curve_add(c, P3, P) == curve_add(c, P2, P2)


def test_two_and_four_torsion(gauss):
    assert torsion_points(gauss, 1) == [None]
    two = torsion_points(gauss, 2)
    assert two[0] is None
    assert sorted(P.x for P in two[1:]) == [-1, 0, 1]
    four = torsion_points(gauss, 4)
    assert len(four) == 16
    assert all(curve_mul(gauss, 4, P.xy) is None for P in four[1:])
    assert sum(1 for P in four[1:] if P.order == 4) == 12


def test_torsion_tower_cap(gauss):
    with pytest.raises(TowerTooDeep):
        torsion_points(gauss, 3)


def test_division_polynomials(gauss):
    c = preset("generic")
    u, v = division_polynomial(c, 3)
    g2, g3 = c.g2, c.g3
    assert u.c == [-g2 ** 2 / 16, -3 * g3, Fraction(-3, 2) * g2, 0, 3]
    assert v.is_zero()
    u2, v2 = division_polynomial(gauss, 2)
    assert u2.is_zero()
    assert v2.c == [-1]  # sigma(2z)/sigma(z)^4 = -wp'(z)


def test_cm_action_is_i(gauss):
    x, y = cm_unit_action(gauss, (Fraction(1), Fraction(0)))
    assert (x, y) == (-1, 0)
    P = torsion_points(gauss, 4)[5]
    x, y = cm_unit_action(gauss, P.xy)
    assert x == -P.x and y == gauss.K.gen() * P.y


def test_pi_kernel_polynomial_degree(gauss, split13):
    iso = pi_isogeny(gauss, split13)
    assert iso.kernel_poly.deg == 6 and iso.norm == 13


def test_f1p_residue_oddness_and_value(gauss, split13):
    f = f1p_rational(gauss, split13)
    e = f.expansion(8)
    assert e.coeff(-1) == Fraction(12, 13)
    assert e.coeff(0) == 0 and e.coeff(2) == 0
    assert f.evaluate((1, 0)) == 0


@pytest.mark.parametrize("z0", [(1, 0), (0, 0), (-1, 0)])
def test_translation_matches_ode_oracle(gauss, z0):
    X, Y = translate_wp(gauss, z0, 10)
    ref = taylor_translate_oracle(gauss, *z0, 10)
    assert [X.coeff(k) for k in range(10)] == ref
    assert X.coeff(0) == z0[0] and X.coeff(1) == z0[1]
    assert Y.truncate(9) == X.derivative().truncate(9)


def test_translation_at_four_torsion(gauss):
    P = torsion_points(gauss, 4)[5]
    X, _ = translate_wp(gauss, P, 8)
    assert X.coeff(0) == P.x and X.coeff(1) == P.y
    assert X.coeff(2) == (6 * P.x ** 2 - 2) / 2


def test_algebraize_connection_maps(gauss):
    assert connection_map(gauss, 2).format() == "-1/2*wp"
    wp = wp_family(gauss, 24).wp
    L4 = algebraize(wp * wp * Fraction(-1, 8) + T({0: Fraction(gauss.g2, 40)}, 24), gauss)
    assert L4 == connection_map(gauss, 4)


def test_preset_parsing():
    table = parse_presets("a g2=4 g3=0 d=1 e2star=0 prime=13 pi=3+2i  # comment\n\nb g2=1 g3=1".replace("a g2", "name=a g2").replace("b g2", "name=b g2"))
    assert table["a"].pi == 3 + 2 * table["a"].K.gen()
    assert table["b"].K is QQ
    with pytest.raises(ConfigError):
        parse_presets("name=x g2=1 g3=1 bogus=2")
    with pytest.raises(ConfigError):
        parse_presets("name=x g2=3 g3=1")
    with pytest.raises(ConfigError):
        preset("nope")


def test_point_selectors(gauss):
    assert select_point(gauss, "lattice") is None
    assert select_point(gauss, "2tor:1").xy == (1, 0)
    assert select_point(gauss, "point:0,0").xy == (0, 0)
    with pytest.raises(ConfigError):
        select_point(gauss, "point:2,2")
