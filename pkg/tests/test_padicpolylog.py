import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ekpolylog.exactnum import embed_padic
from ekpolylog.padicpolylog import (
    DiscPipeline,
    choose_order,
    interpolation_rhs,
    relation_check,
    series_agree,
    star_constant,
)
from ekpolylog.suites import split_pipeline
from ekpolylog.weierstrass import preset


@pytest.fixture(scope="module")
def pipe():
    return split_pipeline()


def zero(x):
    return x.r == 0


@given(st.integers(1, 8), st.integers(0, 4))
def test_order_choice_controls_the_tail(n_out, m):
    from ekpolylog.formalgroup import power_sum_tail_bound

    M = choose_order(13, 13, n_out, m, slack=0)
    assert power_sum_tail_bound(M, 13, 13, m) >= n_out + 1
    assert power_sum_tail_bound(M - 1, 13, 13, m) < n_out + 1


def test_fhat_low_rows(pipe):
    assert pipe.fhat(0).c.keys() <= {0} and pipe.fhat(0).coeff(0) == 1
    F1 = pipe.fhat(1)
    assert zero(F1.coeff(0))
    assert zero(F1.coeff(1) + 1)


def test_restricted_rows_vanish_in_degree_zero(pipe):
    R0 = pipe.restricted(0)
    assert all(zero(a) for a in R0.c.values())


def test_moments_interpolate_exact_values(pipe):
    assert zero(pipe.moment(0, 1))
    for a, b in [(1, 1), (2, 1), (1, 2), (3, 3)]:
        lhs = pipe.moment(a, b)
        rhs = embed_padic(interpolation_rhs(pipe.c, pipe.z0, a, b, pipe.sp), pipe.sp, lhs.absprec)
        assert zero(lhs - rhs)


def test_ehat_base_case_is_restricted_series(pipe):
    for b in (1, 2, 3):
        assert series_agree(pipe.ehat(0, b).series, pipe.restricted(b))


@settings(max_examples=12)
@given(st.integers(0, 4), st.integers(1, 4))
def test_ehat_audit_vanishes(pipe, m, b):
    e = pipe.ehat(m, b)
    assert e.certified >= 4
    if e.audit is not None:
        assert zero(e.audit.with_absprec(e.certified))


@settings(max_examples=10)
@given(st.integers(1, 4), st.integers(1, 4))
def test_ehat_solves_its_differential_equation(pipe, m, b):
    r = pipe.ehat_differential_residual(m, b)
    assert all(zero(x) for x in r.c.values())


def test_dhat_first_step_and_vanishing(pipe):
    assert series_agree(pipe.dhat(1, 1), pipe.ehat(1, 1).series)
    for m in (1, 2, 3):
        assert all(zero(a) for a in pipe.dhat(m, 0).c.values())


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_dhat_matches_p_modified_connection_oracle(pipe, n):
    assert series_agree(pipe.dhat(0, n), pipe.dhat_oracle(n))


def test_specialization_table_degree_two(pipe):
    t = pipe.specialization_table(2)
    assert len(t.rows()) == 4
    assert t.min_precision() >= 4
    assert t.suppressed == [(0, 2)]
    assert t.normalization == "omega-free"
    t1 = pipe.specialization_table(1)
    assert zero(t1.omega[(1, 0)] - pipe.ehat(1, 1).value)


def test_relation_between_conventions(pipe, gauss):
    assert [star_constant(gauss, b) for b in range(5)] == [0, 0, 0, Fraction(2, 5), 0]
    for b in range(3):
        assert relation_check(pipe, b)


@pytest.mark.parametrize("a,b", [(1, 1), (2, 1), (0, 2), (1, 3)])
def test_interpolation_value_at_a_fixed_point(gauss, split13, a, b):
    from ekpolylog.kronecker import ek_exact

    e = ek_exact(gauss, (1, 0), a, b)
    pi, pibar = split13.pi, split13.pibar
    assert interpolation_rhs(gauss, (1, 0), a, b, split13) == (-1) ** (a + b - 1) * (e - pi ** a * e / pibar ** b)


def test_inert_smoke():
    c = preset("gauss_inert")
    sp = c.prime_data()
    assert not sp.split and sp.norm == 49
    pipe = DiscPipeline(c, (1, 0), sp, 120, 4, 1)
    for a in range(3):
        lhs = pipe.moment(a, 1)
        rhs = embed_padic(interpolation_rhs(c, (1, 0), a, 1, sp), sp, lhs.absprec)
        assert zero(lhs - rhs)
    e = pipe.ehat(0, 1)
    if e.audit is not None and e.certified > 0:
        assert zero(e.audit.with_absprec(e.certified))
    assert all(zero(x) for x in pipe.ehat_differential_residual(1, 1).c.values())
