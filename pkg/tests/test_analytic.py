import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from ekpolylog.analytic import (
    eisenstein_E,
    ek_numeric,
    g_family,
    invariants_of_basis,
    kstar,
    lattice_of_curve,
    point_to_z,
    registered_identities,
    verify_identity,
)
from ekpolylog.errors import DomainError, PathThroughLattice, PoleError, UnknownIdentity
from ekpolylog.exactnum import embed_complex
from ekpolylog.weierstrass import preset, torsion_points

unit = st.floats(min_value=0.15, max_value=0.85)


@pytest.fixture(scope="module")
def L():
    return lattice_of_curve(preset("gauss"), 30)


def test_square_lattice_shape(L):
    with mp.workdps(30):
        assert abs(L.tau - 1j) < 1e-25
        assert abs(L.A - abs(L.gamma2) ** 2 / mp.pi) < 1e-25
        assert abs(L.pair(L.gamma1, L.gamma2) - 1) < 1e-25


@pytest.mark.parametrize("name", ["gauss", "hex", "generic"])
def test_invariants_recovered(name):
    c = preset(name)
    L = lattice_of_curve(c, 30)
    with mp.workdps(30):
        g2, g3 = invariants_of_basis(L.gamma1, L.gamma2)
        assert abs(g2 - embed_complex(c.g2, 30)) < 1e-20
        assert abs(g3 - embed_complex(c.g3, 30)) < 1e-20


def test_e2star_matches_exact(L):
    assert abs(L.e2star) < 1e-20


def test_torsion_points_map_to_wp_values(L):
    c = preset("gauss")
    for P in torsion_points(c, 4)[1:6]:
        z = point_to_z(L, P)
        with mp.workdps(30):
            assert abs(L.wp(z) - embed_complex(P.x, 30)) < 1e-18
            assert abs(L.dwp(z) - embed_complex(P.y, 30)) < 1e-18


@settings(max_examples=20)
@given(unit, unit)
def test_wp_satisfies_its_differential_equation(L, u, v):
    with mp.workdps(30):
        z = u * L.gamma1 + v * L.gamma2
        lhs = L.dwp(z) ** 2
        rhs = 4 * L.wp(z) ** 3 - 4 * L.wp(z)
        assert abs(lhs - rhs) <= 1e-18 * max(1, abs(lhs))
        assert abs(L.wp(z + L.gamma1) - L.wp(z)) <= 1e-18 * max(1, abs(L.wp(z)))


@settings(max_examples=20)
@given(unit, unit)
def test_kronecker_theta_is_symmetric(L, u, v):
    with mp.workdps(30):
        z = u * L.gamma1 + v * L.gamma2
        w = v * L.gamma1 + 0.5 * u * L.gamma2
        a, b = L.kronecker_theta(z, w), L.kronecker_theta(w, z)
        assert abs(a - b) <= 1e-18 * max(1, abs(a))


def test_value_at_s_zero_and_pole(L):
    with mp.workdps(30):
        w0 = 0.3 * L.gamma1 + 0.4 * L.gamma2
        assert abs(kstar(L, 0, 0, w0, 0) + L.pair(w0, 0)) < 1e-25
        with pytest.raises(PoleError):
            kstar(L, 0, w0, 0, 1)


@pytest.mark.parametrize("b,expected", [(4, 1 / 15), (8, None)])
def test_lattice_eisenstein_values(L, b, expected):
    from ekpolylog.kronecker import ek_exact

    exact = ek_exact(preset("gauss"), None, 0, b)
    assert abs(ek_numeric(L, 0, b, 0) - embed_complex(exact, 30)) < 1e-20
    if expected is not None:
        assert abs(complex(embed_complex(exact, 30)) - expected) < 1e-15


def test_E_domain(L):
    with pytest.raises(DomainError):
        eisenstein_E(L, 1, 2, L.gamma1)


@settings(max_examples=5)
@given(unit, unit)
def test_E_periodicity_and_E00(L, u, v):
    with mp.workdps(30):
        z = u * L.gamma1 + v * L.gamma2
        e = eisenstein_E(L, 1, 2, z)
        assert abs(eisenstein_E(L, 1, 2, z + L.gamma2) - e) <= 1e-15 * max(1, abs(e))
        assert abs(eisenstein_E(L, 0, 0, z) + 1) < 1e-20


def test_path_through_lattice_rejected(L):
    with pytest.raises(PathThroughLattice):
        g_family(L, 1, 1, 0.3 * L.gamma1 + 0.3 * L.gamma2, path=[0.001 * L.gamma1])


def test_registry(L):
    names = set(registered_identities())
    assert {"functional-equation", "reflection", "diff-Ka", "distribution-theta", "hodge-D0n"} <= names
    with pytest.raises(UnknownIdentity):
        verify_identity("no-such-identity", {})


def test_functional_equation_report():
    r = verify_identity("functional-equation", {"a": 2, "s": mp.mpc(1.3, 0.2)})
    assert r.passed and r.residual < 1e-8
    assert r.as_dict()["name"] == "functional-equation"
