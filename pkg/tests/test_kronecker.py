from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from ekpolylog.errors import CrossCheckError
from ekpolylog.kronecker import (
    EKTable,
    connection_map,
    ek_exact,
    f_translated,
    pi_orbit,
    theta_p_series,
    theta_symmetry_defect,
    xi_expand,
)
from ekpolylog.series import TruncSeries as T, TruncSeries2 as T2
from ekpolylog.weierstrass import CurveData, preset, sigma_series, wp_family


def theta_rows_oracle(c, Mz, Mw):
    """Rows of sigma(z+w)/(sigma(z) sigma(w)) read from z w Theta = sigma(z+w) (z/sigma(z)) (w/sigma(w))."""
    N = Mz + Mw + 2
    sig = sigma_series(c, N + Mw + 2)
    zs = sig.truncate(N + 2).shift(-1).inverse().truncate(N)
    prod = T2.from_sum(sig, (N, Mw + 1)) * T2.from_u(zs) * T2.from_v(zs.truncate(Mw + 1))
    prod = prod.truncate((N, Mw + 1))
    return [T({i - 1: prod.coeff(i, b) for i in range(N) if prod.coeff(i, b)}, Mz) for b in range(Mw + 1)]


@pytest.mark.parametrize("name", ["gauss", "hex"])
def test_theta_rows_match_sigma_quotient(name):
    c = preset(name)
    xi = xi_expand(c, 10, 6)
    oracle = theta_rows_oracle(c, 10, 5)
    for b in range(6):
        assert min(xi.F(b).order, oracle[b].order) >= 5
        assert xi.F(b).agrees_with(oracle[b])


def test_connection_functions(gauss):
    xi = xi_expand(gauss, 12, 6)
    wp = wp_family(gauss, 12).wp
    assert xi.L[0].c == {0: 1}
    assert xi.L[1].is_zero()
    assert xi.L[2].truncate(10) == (wp * Fraction(-1, 2)).truncate(10)
    assert connection_map(gauss, 3).format() == "-1/6*dwp"


def test_L4_finite_formula(gauss):
    rows = theta_rows_oracle(gauss, 12, 5)
    F1 = rows[1]
    L4 = rows[4] - F1 * rows[3] + F1 * F1 * rows[2] * Fraction(1, 2) - F1 ** 4 * Fraction(1, 8)
    assert connection_map(gauss, 4).expansion(12).truncate(8) == L4.truncate(8)
    wp = wp_family(gauss, 12).wp
    assert L4.truncate(8) == (wp * wp * Fraction(-1, 8) + T({0: Fraction(gauss.g2, 40)}, 12)).truncate(8)


def test_xi_w_principal_part(gauss):
    assert xi_expand(gauss, 4, 4).theta_rows()[0].c == {0: 1}


@settings(max_examples=15)
@given(st.fractions(min_value=-4, max_value=4, max_denominator=3), st.fractions(min_value=-4, max_value=4, max_denominator=3))
def test_theta_symmetry_on_random_curves(g2, g3):
    assume(g2 ** 3 - 27 * g3 ** 2 != 0)
    assert theta_symmetry_defect(CurveData(g2, g3), 6) == []


@pytest.mark.parametrize("name", ["gauss", "hex"])
def test_lattice_values_are_eisenstein_sums(name):
    c = preset(name)
    assert ek_exact(c, None, 0, 0) == -1
    assert all(ek_exact(c, None, a, 0) == 0 for a in range(1, 4))
    assert ek_exact(c, None, 0, 2) == c.e2star
    assert ek_exact(c, None, 0, 4) == c.g2 / 60
    assert ek_exact(c, None, 0, 6) == c.g3 / 140


def test_translated_series_at_two_torsion(gauss, split13):
    assert pi_orbit(gauss, (1, 0), split13.pi) == [(1, 0)]
    F1 = f_translated(gauss, (1, 0), 1, split13, 6)
    assert F1.series.coeff(0) == 0 and F1.seed == 0
    assert F1.series.coeff(1) == -1
    F2 = f_translated(gauss, (1, 0), 2, split13, 6)
    assert F2.series.coeff(0) == -ek_exact(gauss, (1, 0), 0, 2)


def test_ek_table_round_trip_and_consistency(gauss):
    t = EKTable().fill(gauss, (1, 0), "2tor:1", 3, 3)
    again = EKTable.parse(t.serialize(), gauss.K)
    assert again.serialize() == t.serialize()
    with pytest.raises(CrossCheckError):
        t.add(1, 1, "2tor:1", t.get(1, 1, "2tor:1") + 1, "tampered")


def test_p_modified_rows(gauss, split13):
    assert theta_p_series(gauss, (1, 0), split13, 6, 4, pi=1).is_zero()
    inert = preset("gauss_inert")
    th = theta_p_series(inert, None, inert.prime_data(), 8, 4)
    # L1 = 0 leaves L1^(p) = F1^(p), whose residue at the origin is 1 - 1/N(p)
    assert th.Lp[1] == th.F1p.truncate(th.Lp[1].order)
    assert th.F1p.coeff(-1) == 1 - Fraction(1, 49)
    assert all(k % 2 for k in th.F1p.c)
