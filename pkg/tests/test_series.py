from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from ekpolylog.errors import CompositionError, ResidueError, TruncationError
from ekpolylog.poly import Poly, interpolate, poly_gcd
from ekpolylog.series import TruncSeries as T, TruncSeries2

coef = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def series(order=8, start=0):
    return st.lists(coef, min_size=order - start, max_size=order - start).map(
        lambda cs: T({k + start: a for k, a in enumerate(cs) if a}, order))


def inner(order=8):
    return st.lists(coef, min_size=order - 1, max_size=order - 1).filter(lambda cs: cs[0] != 0).map(
        lambda cs: T({k + 1: a for k, a in enumerate(cs) if a}, order))


def naive_compose(f: T, g: T, M: int) -> T:
    out = T({}, M)
    power = T({0: 1}, M)
    for k in range(M):
        a = f.coeff(k)
        if a:
            out = out + power * a
        power = (power * g).truncate(M)
    return out.truncate(M)


def test_laurent_composition_with_linear_inner():
    r = T({-1: 1, 1: 1}).compose(T({1: 2}))
    assert r.coeff(-1) == Fraction(1, 2) and r.coeff(1) == 2


def test_geometric_composition():
    geo = T({n: 1 for n in range(5)}, 5)
    assert geo.compose(T({1: 1, 2: 1}, 5)) == T({0: 1, 1: 1, 2: 2, 3: 3, 4: 5}, 5)


def test_identity_composition():
    f = T({0: 3, 2: Fraction(1, 7), 5: -1}, 9)
    assert f.compose(T({1: 1})) == f


def test_exp_log_definitions():
    assert T({}, 4).exp() == T({0: 1}, 4)
    assert T({1: 1}, 4).exp() == T({0: 1, 1: 1, 2: Fraction(1, 2), 3: Fraction(1, 6)}, 4)
    assert T({0: 1, 1: 1}, 4).log() == T({1: 1, 2: Fraction(-1, 2), 3: Fraction(1, 3)}, 4)


def test_calculus_basics():
    assert T({3: 1}).derivative().c == {2: 3}
    assert T({2: 1}).integral().c == {3: Fraction(1, 3)}
    assert T({-1: 1}).derivative().c == {-2: -1}


def test_residue_blocks_integration():
    with pytest.raises(ResidueError):
        T({-1: 1, 2: 1}, 6).integral()


def test_inner_series_with_constant_term_rejected():
    with pytest.raises(CompositionError):
        T({1: 1}, 5).compose(T({0: 1, 1: 1}, 5))


def test_exact_polynomial_inverse_needs_order():
    with pytest.raises(TruncationError):
        T({0: 1, 1: 1}).inverse()


def test_catalan_reversion():
    r = T({1: 1, 2: 1}, 8).reversion()
    catalan = [1, 1, 2, 5, 14, 42, 132]
    assert all(r.coeff(k + 1) == (-1) ** k * catalan[k] for k in range(7))


@given(series(), inner())
def test_composition_matches_naive_substitution(f, g):
    assert f.compose(g) == naive_compose(f, g, 8)


@given(series(), series(), inner())
def test_composition_is_a_ring_map(f, h, g):
    assert (f * h).truncate(8).compose(g) == (f.compose(g) * h.compose(g)).truncate(8)


@given(inner())
def test_reversion_is_a_two_sided_inverse(g):
    r = g.reversion()
    assert g.compose(r).truncate(8) == T({1: 1}, 8)
    assert r.compose(g).truncate(8) == T({1: 1}, 8)


@given(series(start=1))
def test_exp_log_round_trip(f):
    assert f.exp().log() == f


@given(series(), series())
def test_product_rule(f, h):
    assert (f * h).derivative() == f.derivative() * h + f * h.derivative()


@given(series(start=0).filter(lambda f: f.coeff(0) != 0))
def test_inverse(f):
    assert (f * f.inverse()).truncate(8) == T({0: 1}, 8)


@given(series())
def test_integral_inverts_derivative(f):
    assert f.integral().derivative() == f


def test_two_variable_exp_and_transpose():
    zw = (TruncSeries2.from_u(T({1: 1}, 6)) * TruncSeries2.from_v(T({1: 1}, 6))).truncate((6, 6))
    E = zw.exp()
    assert E.coeff(3, 3) == Fraction(1, 6)
    assert E.coeff(3, 2) == 0
    assert E.transpose() == E


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=5), st.lists(st.integers(-9, 9), min_size=1, max_size=5))
def test_poly_division_identity(a, b):
    A, B = Poly([Fraction(x) for x in a]), Poly([Fraction(x) for x in b])
    if B.is_zero():
        return
    q, r = A.divmod(B)
    assert q * B + r == A
    assert r.is_zero() or r.deg < B.deg


@given(st.lists(st.integers(-9, 9), min_size=2, max_size=4))
def test_gcd_recovers_common_factor(a):
    f = Poly([Fraction(x) for x in a])
    common = Poly([Fraction(1), Fraction(3), Fraction(1)])
    g = poly_gcd(f * common, Poly([Fraction(2), Fraction(1)]) * common)
    assert (common % g).is_zero() or f.is_zero()
    assert ((f * common) % g).is_zero()


def test_interpolation_oracle():
    pts = [Fraction(k) for k in range(4)]
    vals = [k ** 3 - 2 * k for k in range(4)]
    assert interpolate(pts, vals) == Poly([0, -2, 0, 1])


@given(series(order=7, start=-2), series(order=9, start=-1))
def test_product_order_rule(f, h):
    assume(f.c and h.c)
    p = f * h
    assert p.order == min(f.order + h.floor, h.order + f.floor)


def test_unknown_coefficients_are_not_zero():
    with pytest.raises(TruncationError):
        T({0: 1}, 3).coeff(3)
