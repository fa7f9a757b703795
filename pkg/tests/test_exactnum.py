from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ekpolylog.errors import FieldError
from ekpolylog.exactnum import (
    QQ,
    embed_complex,
    embed_padic,
    parse_exact,
    precision_ledger,
    quadratic_field,
    serialize_exact,
    serialize_padic,
)

K = quadratic_field(1)
I = K.gen()

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=30)
gauss_ints = st.tuples(st.integers(-30, 30), st.integers(-30, 30))
elements = st.tuples(fracs, fracs).map(lambda t: t[0] + t[1] * I)


def hensel_sqrt_minus_one(p, N, start):
    u, mod = start, p ** N
    for _ in range(N + 2):
        u = (u - (u * u + 1) * pow(2 * u, -1, mod)) % mod
    return u


def test_complex_embedding_of_generator():
    assert embed_complex(I) == 1j
    assert embed_complex(3 + 2 * I) == 3 + 2j
    z = embed_complex((1 + I) / 2, 30)
    assert abs(z - (0.5 + 0.5j)) < 1e-30


def test_padic_generator_matches_hensel_oracle(split13):
    u = embed_padic(I, split13, 3).lift()[0]
    assert u == hensel_sqrt_minus_one(13, 3, 5)
    assert (u * u + 1) % 13 ** 3 == 0
    assert (3 + 2 * u) % 13 == 0


def test_padic_half(split13):
    assert embed_padic(Fraction(1, 2), split13, 2).lift()[0] == 85


def test_padic_zero_has_requested_precision(split13):
    z = embed_padic(0, split13, 7)
    assert z.is_zero() and z.absprec >= 7


def test_conjugation_and_norm():
    x = 3 + 2 * I
    assert x.conjugate_quadratic() == 3 - 2 * I
    assert x.norm() == 13


def test_division_by_zero_raises():
    with pytest.raises((ZeroDivisionError, FieldError)):
        (0 * I).inverse()


@given(elements, elements)
def test_field_axioms(x, y):
    assert x * y == y * x
    assert (x + y) - y == x
    if y != 0:
        assert (x / y) * y == x


@given(elements)
def test_serialize_round_trip(x):
    assert parse_exact(serialize_exact(x), K) == x


@given(gauss_ints, gauss_ints)
def test_complex_embedding_is_ring_homomorphism(a, b):
    x, y = a[0] + a[1] * I, b[0] + b[1] * I
    assert abs(embed_complex(x * y, 30) - embed_complex(x, 30) * embed_complex(y, 30)) < 1e-25
    assert abs(embed_complex(x + y, 30) - embed_complex(x, 30) - embed_complex(y, 30)) < 1e-25


units13 = st.fractions(min_value=-50, max_value=50, max_denominator=30).filter(lambda q: q.denominator % 13)
integral13 = st.tuples(units13, units13).map(lambda t: t[0] + t[1] * I)


@given(integral13, integral13)
def test_padic_embedding_is_ring_homomorphism(x, y):
    from ekpolylog.weierstrass import preset

    sp = preset("gauss").prime_data()
    ex, ey = embed_padic(x, sp, 8), embed_padic(y, sp, 8)
    assert (embed_padic(x * y, sp, 8) - ex * ey).is_zero()
    assert (embed_padic(x + y, sp, 8) - (ex + ey)).is_zero()


@given(st.integers(1, 10 ** 6), st.integers(0, 6))
def test_padic_valuation_of_integers(n, k):
    from ekpolylog.weierstrass import preset

    F = preset("gauss").prime_data().field
    a = F.from_rational(n * 13 ** k, 30)
    v = 0
    while n % 13 == 0:
        n //= 13
        v += 1
    assert a.valuation() == v + k


def test_padic_serialization_is_stable(split13):
    x = embed_padic(Fraction(7, 3), split13, 5)
    assert serialize_padic(x) == serialize_padic(embed_padic(Fraction(14, 6), split13, 5))


def test_precision_ledger_collects_records():
    from ekpolylog.exactnum import ledger_record

    with precision_ledger() as led:
        ledger_record("stage", 5, 3)
    assert led.as_dict()["stage"]["achieved"] == 3


def test_rationals_live_in_qq():
    assert QQ.contains(Fraction(1, 3))
    assert not QQ.contains(I)
