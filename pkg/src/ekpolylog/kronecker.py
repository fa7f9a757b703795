"""Kronecker theta expansions, connection functions and exact Eisenstein-Kronecker numbers.

Everything here is built from

    Xi(z, w) = exp(-zeta(z) w) sigma(z + w) / (sigma(z) sigma(w)) = sum_n L_n(z) w^(n-1),

which has coefficients in K, and from F1 = zeta - e2* z.  The theta function
itself is never formed: Theta(z, w) = exp(F1(z) w) Xi(z, w).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import CrossCheckError, OrbitError, ResidueError
from .exactnum import AlgebraicNumber, SplitPrimeData, parse_exact, serialize_exact
from .series import TruncSeries, TruncSeries2
from .weierstrass import (
    CurveData,
    RationalMap,
    TorsionPoint,
    _xy,
    algebraize,
    cm_mul,
    f1p_rational,
    translate_wp,
    wp_family,
)


def _demote(x):
    return x.demote() if isinstance(x, AlgebraicNumber) else x


def _inv(x):
    return Fraction(1, x) if isinstance(x, int) else 1 / x


# ---------------------------------------------------------------------------
# Xi and Theta
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XiExpansion:
    """Rows L_n(z) (coefficient of w^(n-1)) for n < M_w, each known below z^M_z."""

    curve: CurveData
    L: tuple
    F1: TruncSeries
    orders: tuple

    def as_series2(self) -> TruncSeries2:
        Mz, Mw = self.orders
        coeffs = {(i, n - 1): a for n, Ln in enumerate(self.L) for i, a in Ln.c.items()}
        return TruncSeries2(coeffs, (Mz, Mw - 1), ("z", "w"))

    def F(self, b: int) -> TruncSeries:
        """F_b(z) = sum_{n<=b} F1^(b-n)/(b-n)! L_n(z), the w^(b-1) coefficient of Theta."""
        return _assemble_F(self.F1, self.L, b).truncate(self.orders[0])

    def theta_rows(self):
        return [self.F(b) for b in range(len(self.L))]


def _assemble_F(F1, L, b):
    out = L[b]
    power = None
    for k in range(1, b + 1):
        power = F1 if power is None else power * F1
        out = out + power * Fraction(1, math.factorial(k)) * L[b - k]
    return out


@lru_cache(maxsize=32)
def _xi_rows(c: CurveData, Mz: int, Mw: int):
    work = Mz + 3 * Mw + 8
    while True:
        fam = wp_family(c, work)
        zeta = fam.zeta
        # h_k = sigma^(k)/sigma via h_{k+1} = h_k' + zeta h_k
        h = [TruncSeries.const(Fraction(1), work)]
        for _ in range(1, Mw):
            h.append(h[-1].derivative() + zeta * h[-1])
        mz = [TruncSeries.const(Fraction(1), work)]
        for m in range(1, Mw):
            mz.append(mz[-1] * (-zeta) * Fraction(1, m))
        A = []
        for n in range(Mw):
            acc = None
            for k in range(n + 1):
                t = h[k] * Fraction(1, math.factorial(k)) * mz[n - k]
                acc = t if acc is None else acc + t
            A.append(acc)
        # w / sigma(w) as exact rational coefficients
        sig = fam.sigma.truncate(Mw + 2)
        s_inv = (sig.shift(-1)).inverse()
        L = []
        for n in range(Mw):
            acc = None
            for j in range(n + 1):
                sj = s_inv.coeff(j)
                if sj == 0:
                    continue
                t = A[n - j] * sj
                acc = t if acc is None else acc + t
            L.append(acc)
        if all(Ln.order >= Mz for Ln in L):
            return tuple(Ln.truncate(Mz) for Ln in L), fam.F1
        work += Mz


def xi_expand(c: CurveData, Mz: int, Mw: int) -> XiExpansion:
    """Two-variable expansion of Xi with rows L_0 .. L_{Mw-1}, each known below z^Mz."""
    if Mz < 4 or Mw < 4:
        raise ValueError("orders must be at least 4")
    L, F1 = _xi_rows(c, Mz, Mw)
    return XiExpansion(c, L, F1.truncate(Mz + Mw), (Mz, Mw))


def theta_expand(c: CurveData, Mz: int, Mw: int) -> TruncSeries2:
    """Theta(z, w) = exp(F1(z) w) Xi(z, w) as a two-variable series; the w^(b-1) row is F_b."""
    xi = xi_expand(c, Mz, Mw)
    coeffs = {}
    for b in range(Mw):
        for i, a in xi.F(b).c.items():
            coeffs[(i, b - 1)] = a
    return TruncSeries2(coeffs, (Mz, Mw - 1), ("z", "w"))


def theta_symmetry_defect(c: CurveData, M: int):
    """Pairs (i, j) with i, j < M where the z^i w^j and z^j w^i coefficients of Theta differ."""
    th = theta_expand(c, M, M + 1)
    bad = []
    for i in range(-1, M):
        for j in range(i + 1, M):
            if th.coeff(i, j) != th.coeff(j, i):
                bad.append((i, j))
    return bad


@lru_cache(maxsize=None)
def connection_map(c: CurveData, n: int) -> RationalMap:
    """L_n as a polynomial in wp, wp' (pole-order descent on its Laurent expansion)."""
    M = n + 8
    xi = xi_expand(c, M, max(n + 1, 4))
    return algebraize(xi.L[n], c)


# ---------------------------------------------------------------------------
# Translated generating series
# ---------------------------------------------------------------------------


def pi_orbit(c: CurveData, z0, pi, limit: int = 64):
    """[z0, pi z0, ..., pi^(n-1) z0] with pi^n z0 = z0."""
    P0 = _xy(z0)
    orbit = [P0]
    Q = cm_mul(c, pi, P0)
    while Q != P0:
        if Q is None:
            raise OrbitError("pi-orbit reached the origin; the point is not prime to p")
        orbit.append(Q)
        if len(orbit) > limit:
            raise OrbitError(f"pi-orbit did not close within {limit} steps")
        Q = cm_mul(c, pi, Q)
    return orbit


def f_translated_seed(c: CurveData, z0, sp: SplitPrimeData):
    """F_{z0,1}(0) = (1 - pibar^-n)^-1 sum_{k<n} pibar^-k F1^(p)(pi^k z0)."""
    f1p = f1p_rational(c, sp)
    orbit = pi_orbit(c, z0, sp.pi)
    pibar_inv = _inv(sp.pibar)
    total = 0
    w = Fraction(1)
    for P in orbit:
        total = total + w * f1p.evaluate(P)
        w = w * pibar_inv
    return _demote(total / (1 - w))


@dataclass(frozen=True)
class TranslatedF:
    z0: object
    b: int
    series: TruncSeries
    seed: object


@lru_cache(maxsize=64)
def _translated_rows(c: CurveData, P, seed, bmax: int, M: int):
    X, Y = translate_wp(c, P, M + 1)
    e2 = c.require_e2star()
    F1z = (-X - e2).truncate(M).integral().truncate(M) + seed
    Ls = [TruncSeries.const(Fraction(1), M)]
    for n in range(1, bmax + 1):
        Ls.append(connection_map(c, n).evaluate_series(X, Y).truncate(M))
    rows = [TruncSeries.const(Fraction(1), M)]
    for b in range(1, bmax + 1):
        rows.append(_assemble_F(F1z, Ls, b).truncate(M))
    return tuple(rows), tuple(Ls), F1z


def translated_rows(c: CurveData, z0, sp: SplitPrimeData, bmax: int, M: int):
    """(F_{z0,0..bmax}, L_{0..bmax}(z+z0), F_{z0,1}) as series in z known below z^M."""
    seed = f_translated_seed(c, z0, sp)
    return _translated_rows(c, _xy(z0), seed, bmax, M)


def f_translated(c: CurveData, z0, b: int, sp: SplitPrimeData, M: int) -> TranslatedF:
    """F_{z0,b}(z) = sum_{n<=b} F_{z0,1}(z)^(b-n)/(b-n)! L_n(z+z0) for torsion z0 outside the lattice."""
    if z0 is None:
        raise ValueError("use xi_expand for the untranslated series")
    rows, _, F1z = translated_rows(c, z0, sp, max(b, 1), M)
    return TranslatedF(z0, b, rows[b], F1z.coeff(0))


# ---------------------------------------------------------------------------
# Exact Eisenstein-Kronecker numbers
# ---------------------------------------------------------------------------


def ek_from_F(Fb: TruncSeries, a: int, b: int):
    """Read e*_{a,b}/A^a off F_b: the z^a coefficient is (-1)^(a+b-1) e*_{a,b}/(a! A^a)."""
    return _demote((-1) ** (a + b - 1) * math.factorial(a) * Fb.coeff(a))


def ek_exact(c: CurveData, z0, a: int, b: int, sp: SplitPrimeData | None = None):
    """e*_{a,b}(z0)/A^a for a, b >= 0; z0 = None means the lattice point."""
    if a < 0 or b < 0:
        raise ValueError("exact values need a, b >= 0")
    if b == 0:
        return Fraction(-1) if a == 0 else Fraction(0)
    M = a + 2
    if z0 is None:
        xi = xi_expand(c, M + 2 * b + 4, max(b + 1, 4))
        Fb = xi.F(b)
        if b == 1:
            if Fb.coeff(-1) != 1:
                raise ResidueError("F_1 should have residue 1 at the lattice point")
            Fb = Fb - TruncSeries.monomial(-1, Fraction(1), Fb.order)
        return ek_from_F(Fb, a, b)
    if sp is None:
        sp = c.prime_data()
    return ek_from_F(f_translated(c, z0, b, sp, M).series, a, b)


@dataclass
class EKTable:
    """Append-only table of e*_{a,b}(z0)/A^a with provenance; re-adding must reproduce the value."""

    entries: dict = field(default_factory=dict)

    def add(self, a: int, b: int, zid: str, value, provenance: str):
        key = (a, b, zid)
        if key in self.entries:
            old, _ = self.entries[key]
            if old != value:
                raise CrossCheckError(f"EK entry {key} recomputed as {serialize_exact(value)}, stored {serialize_exact(old)}")
            return
        self.entries[key] = (value, provenance)

    def get(self, a, b, zid):
        return self.entries[(a, b, zid)][0]

    def fill(self, c: CurveData, z0, zid: str, amax: int, bmax: int, sp=None):
        for b in range(bmax + 1):
            for a in range(amax + 1):
                self.add(a, b, zid, ek_exact(c, z0, a, b, sp), "exact:F-series")
        return self

    def serialize(self) -> str:
        lines = []
        for (a, b, zid), (v, prov) in sorted(self.entries.items()):
            lines.append(f"{a} {b} {zid} {serialize_exact(v)} {prov}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def parse(cls, text: str, field_=None):
        from .exactnum import QQ

        t = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            a, b, zid, v, prov = line.split(" ", 4)
            t.add(int(a), int(b), zid, parse_exact(v, field_ or QQ), prov)
        return t


# ---------------------------------------------------------------------------
# p-modified connection functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaPExpansion:
    """Rows L_n^(p)(z+z0) and the series F1^(p)(z+z0)."""

    z0: object
    Lp: tuple
    F1p: TruncSeries
    orders: tuple

    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.Lp) and self.F1p.is_zero()


def _L_rows_at(c: CurveData, P, n_max: int, M: int, scale=None):
    """L_0..L_{n_max} at z + P (P = None: untranslated), optionally with z replaced by scale*z."""
    if P is None:
        work = M + n_max + 2
        xi = xi_expand(c, max(work, 4), max(n_max + 1, 4))
        rows = list(xi.L[: n_max + 1])
        if scale is not None:
            rows = [r.scale(scale) for r in rows]
        return [r.truncate(M) for r in rows]
    X, Y = translate_wp(c, P, M)
    if scale is not None:
        X, Y = X.scale(scale), Y.scale(scale)
    rows = [TruncSeries.const(Fraction(1), M)]
    for n in range(1, n_max + 1):
        rows.append(connection_map(c, n).evaluate_series(X, Y).truncate(M))
    return rows


def theta_p_series(c: CurveData, z0, sp: SplitPrimeData | None, Mz: int, Mw: int, pi=None) -> ThetaPExpansion:
    """L_n^(p)(z+z0) = L_n(z+z0) - sum_k pibar^-k (-F1^(p)(z+z0))^(n-k)/(n-k)! L_k(pi z + pi z0).

    ``pi`` overrides sp.pi; pi = 1 gives the zero object.
    """
    pi = sp.pi if pi is None else pi
    pibar = pi.conjugate_quadratic() if isinstance(pi, AlgebraicNumber) else pi
    n_max = Mw - 1
    P = None if z0 is None else _xy(z0)
    base = _L_rows_at(c, P, n_max, Mz)
    if pi == 1:
        F1p = TruncSeries({}, base[0].order)
    elif P is None:
        fam = wp_family(c, Mz + 4)
        F1p = (fam.F1 - fam.F1.scale(pi) * _inv(pibar)).truncate(Mz)
    else:
        X, Y = translate_wp(c, P, Mz)
        F1p = f1p_rational(c, sp).evaluate_series(X, Y).truncate(Mz)
    Ppi = None if P is None else cm_mul(c, pi, P)
    if P is not None and Ppi is None:
        raise OrbitError("pi z0 is the origin; z0 is not prime to p")
    scaled = _L_rows_at(c, Ppi, n_max, Mz + n_max, scale=pi)
    pw = [TruncSeries.const(Fraction(1), F1p.order)]
    for j in range(1, n_max + 1):
        pw.append(pw[-1] * (-F1p) * Fraction(1, j))
    rows = []
    pibar_inv = _inv(pibar)
    for n in range(n_max + 1):
        acc = base[n]
        for k in range(n + 1):
            term = scaled[k] * pw[n - k] * (pibar_inv ** k)
            acc = acc - term
        rows.append(acc.truncate(Mz))
    return ThetaPExpansion(z0, tuple(rows), F1p, (Mz, Mw))
