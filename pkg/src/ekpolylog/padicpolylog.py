"""p-adic generating series, unit restriction, E-hat antiderivatives and disc-level polylogarithms.

All quantities live in the normalization where the p-adic period cancels:
moments are iterated derivatives for d_log = lambda'(s)^-1 d/ds at s = 0, and
the Eisenstein-Kronecker values are the constants of the E-hat series.

The translated series are built on the formal group: (X(s), Y(s)) is the
p-adic point (x(s), y(s)) + z0, so L_n-hat = L_n(X, Y) and
F1-hat = F_{z0,1}(0) + integral of lambda'(s) (-X - e2*) ds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import AuditError, OracleMismatch, PrecisionExhausted
from .exactnum import (
    AlgebraicNumber,
    PadicScalar,
    SplitPrimeData,
    embed_padic,
    ledger_record,
    serialize_padic,
)
from .formalgroup import (
    build_formal_group,
    embed_series,
    formal_pi,
    guard_digits,
    min_absprec,
    power_sum_tail_bound,
    prepare_and_power_sums,
    torsion_power_sums,
    torsion_sum,
)
from .kronecker import connection_map, f_translated_seed, theta_p_series
from .poly import Poly
from .series import TruncSeries
from .weierstrass import CurveData, RationalMap, _xy, cm_mul


def _vp_int(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def choose_order(q: int, p: int, n_out: int, m_max: int, slack: int = 16) -> int:
    """Smallest order whose discarded torsion-sum tail stays below p^(n_out + v(q)), plus slack."""
    need = n_out + _vp_int(q, p)
    M = q
    while power_sum_tail_bound(M, q, p, m_max) < need:
        M += 1
    return M + slack


def _embed_poly(P: Poly, sp, N):
    return Poly([embed_padic(a, sp, N) for a in P.c]) if not P.is_zero() else P


def _eval_map(h: RationalMap, X: TruncSeries, Y: TruncSeries, sp, N) -> TruncSeries:
    Un, Ud = _embed_poly(h.U.num, sp, N), _embed_poly(h.U.den, sp, N)
    out = Un(X) / Ud(X) if not h.U.is_zero() else X * 0
    if not h.V.is_zero():
        Vn, Vd = _embed_poly(h.V.num, sp, N), _embed_poly(h.V.den, sp, N)
        out = out + Y * (Vn(X) / Vd(X))
    return out


def _regular(f: TruncSeries) -> TruncSeries:
    """Drop cancelled negative powers, insisting they vanish at the carried precision."""
    bad = [k for k, a in f.c.items() if k < 0 and (a.r if isinstance(a, PadicScalar) else a != 0)]
    if bad:
        raise PrecisionExhausted(f"pole terms at s^{bad[0]} survive cancellation")
    return TruncSeries({k: a for k, a in f.c.items() if k >= 0}, f.order, f.var)


def _cap(f: TruncSeries, n: int) -> TruncSeries:
    return f.map(lambda a: a.with_absprec(n) if isinstance(a, PadicScalar) else a)


def _d_log(f: TruncSeries, inv_dlam: TruncSeries) -> TruncSeries:
    return f.derivative() * inv_dlam


@dataclass
class EhatSeries:
    z0: object
    m: int
    b: int
    series: TruncSeries
    audit: object
    certified: int

    @property
    def value(self):
        return self.series.coeff(0)


@dataclass
class SpecializationTable:
    degree: int
    omega: dict
    omega_star: dict
    suppressed: list
    normalization: str = "omega-free"

    def rows(self):
        out = []
        for (m, k), v in sorted(self.omega.items()):
            out.append((m, k, "omega", v))
        for (m, k), v in sorted(self.omega_star.items()):
            out.append((m, k, "omega*", v))
        return out

    def serialize(self) -> str:
        lines = [f"{m} {k} {row} {serialize_padic(v)} {v.absprec}" for m, k, row, v in self.rows()]
        return "\n".join(lines) + "\n"

    def min_precision(self) -> int:
        return min(v.absprec for _, _, _, v in self.rows())


class DiscPipeline:
    """All p-adic series attached to one residue disc (curve, z0, prime) at order M and precision N."""

    def __init__(self, c: CurveData, z0, sp: SplitPrimeData, M: int, N: int, m_max: int = 4):
        if z0 is None:
            raise ValueError("the disc pipeline needs a torsion point outside the lattice")
        self.c, self.sp, self.M, self.N = c, sp, M, N
        self.z0 = _xy(z0)
        self.q = sp.norm
        self.m_max = m_max
        self.R = N + guard_digits(sp.p, M) + 2 * m_max + 2
        self.fg = build_formal_group(c, M + 8)
        self._fhat = {}
        self._restricted = {}
        self._ehat = {}
        self._dhat = {}
        self._fpi = None
        self._prep = None
        self._ps = None
        self._frames = {}

    # --- shared p-adic data ----------------------------------------------
    @property
    def fpi(self):
        if self._fpi is None:
            self._fpi = formal_pi(self.fg, self.sp, self.R, self.M, check_through=min(self.M, 2 * self.q + 2))
        return self._fpi

    @property
    def dlam(self) -> TruncSeries:
        return embed_series(self.fg.dlam.truncate(self.M), self.sp, self.R)

    @property
    def inv_dlam(self) -> TruncSeries:
        return self.dlam.inverse()

    @property
    def lam(self) -> TruncSeries:
        return embed_series(self.fg.lam.truncate(self.M), self.sp, self.R)

    def power_sums(self):
        if self._ps is None:
            self._ps = torsion_power_sums(self.c, self.sp, self.M + 2, self.R)
        return self._ps

    def prepared(self):
        if self._prep is None:
            self._prep = prepare_and_power_sums(self.fpi.series, self.M + 2, self.q)
        return self._prep

    def pibar(self, n):
        return embed_padic(self.sp.pibar, self.sp, n)

    # --- translated frames ------------------------------------------------
    def frame(self, P):
        """(X, Y, F1-hat, [L_n-hat]) for the disc around the exact point P."""
        key = P
        if key in self._frames:
            return self._frames[key]
        sp, R, M = self.sp, self.R, self.M
        fg = self.fg
        x = embed_series(fg.x, sp, R)
        y = embed_series(fg.y, sp, R)
        x0, y0 = embed_padic(P[0], sp, R), embed_padic(P[1], sp, R)
        lc = (y - y0) / (x - x0)
        X = _regular((lc * lc * Fraction(1, 4) - x - x0).truncate(M))
        Y = _regular((-(lc * (X - x0)) - y0).truncate(M))
        seed = f_translated_seed(self.c, P, sp)
        e2 = self.c.require_e2star()
        F1 = ((-X - embed_padic(e2, sp, R)) * self.dlam).truncate(M - 1).integral() + embed_padic(seed, sp, R)
        fr = {"X": X, "Y": Y, "F1": F1.truncate(M), "seed": seed, "L": {0: TruncSeries.const(Fraction(1), M, "s")}}
        self._frames[key] = fr
        return fr

    def L_hat(self, P, n):
        fr = self.frame(P)
        if n not in fr["L"]:
            h = connection_map(self.c, n)
            fr["L"][n] = _eval_map(h, fr["X"], fr["Y"], self.sp, self.R).truncate(self.M)
        return fr["L"][n]

    # --- generating series ------------------------------------------------
    def fhat(self, b: int, P=None) -> TruncSeries:
        """F_{P,b}-hat(s) = sum_n F1-hat^(b-n)/(b-n)! L_n-hat(s)."""
        P = self.z0 if P is None else P
        key = (P, b)
        if key not in self._fhat:
            if b == 0:
                out = TruncSeries.const(Fraction(1), self.M, "s")
            else:
                F1 = self.frame(P)["F1"]
                out = self.L_hat(P, b) if b != 1 else TruncSeries({}, self.M, "s")
                pw = None
                for k in range(1, b + 1):
                    pw = F1 if pw is None else (pw * F1).truncate(self.M)
                    if b - k == 1:
                        continue
                    out = out + pw * self.L_hat(P, b - k) * Fraction(1, math.factorial(k))
            self._fhat[key] = out.truncate(self.M)
            ledger_record(f"fhat[b={b}]", self.R, min_absprec(self._fhat[key]))
        return self._fhat[key]

    def pi_z0(self):
        Q = cm_mul(self.c, self.sp.pi, self.z0)
        if Q is None:
            raise ValueError("pi z0 is the origin: z0 is not prime to p")
        return Q

    def restricted(self, b: int, star_shift=None) -> TruncSeries:
        """F_{z0,b}-hat(s) - pibar^-b F_{pi z0,b}-hat([pi](s)); this is E-hat_{0,b}."""
        if star_shift is None and b in self._restricted:
            return self._restricted[b]
        A = self.fhat(b)
        B = self.fhat(b, self.pi_z0())
        if star_shift is not None:
            A, B = A + star_shift, B + star_shift
        comp = B.compose(self.fpi.series.truncate(self.M))
        out = (A - comp * self.pibar(self.R + b) ** (-b)).truncate(self.M)
        if star_shift is None:
            self._restricted[b] = out
            ledger_record(f"restricted[b={b}]", self.R, min_absprec(out))
        return out

    def moment(self, a: int, b: int, series: TruncSeries | None = None):
        """(d_log)^a F^(p)-hat at s = 0."""
        f = self.restricted(b) if series is None else series
        if f.order <= a:
            raise PrecisionExhausted(f"order {f.order} too small for moment a={a}")
        inv = self.inv_dlam
        for _ in range(a):
            f = _d_log(f, inv)
        return f.coeff(0)

    # --- E-hat ------------------------------------------------------------
    def _vmin0(self, b):
        f = self.restricted(b)
        vals = [a.v for a in f.c.values() if a.r]
        return min(0, min(vals)) if vals else 0

    def ehat(self, m: int, b: int) -> EhatSeries:
        key = (m, b)
        if key in self._ehat:
            return self._ehat[key]
        ps = self.power_sums()
        if m == 0:
            s = self.restricted(b)
            cert = min_absprec(s)
        else:
            prev = self.ehat(m - 1, b)
            G = (-(self.dlam * prev.series)).truncate(self.M - 1).integral().truncate(self.M)
            S = torsion_sum(G, ps)
            tail = power_sum_tail_bound(G.order, self.q, self.sp.p, m, self._vmin0(b))
            if S is None:
                S = self.sp.field.zero(tail)
            S = S.with_absprec(min(S.absprec, tail))
            const = -(S / Fraction(self.q))
            s = G + const
            cert = min(const.absprec, prev.certified)
        s = _cap(s, max(cert, min_absprec(s)) if m == 0 else min_absprec(s))
        audit, acert = self._audit(s, m, b)
        e = EhatSeries(self.z0, m, b, s, audit, acert)
        if audit is not None and audit.r and audit.v < acert:
            raise AuditError(f"torsion sum of E-hat_{m},{b} has valuation {audit.v} below certified {acert}")
        ledger_record(f"ehat[m={m},b={b}]", self.N, min(acert, s.coeff(0).absprec if isinstance(s.coeff(0), PadicScalar) else acert))
        self._ehat[key] = e
        return e

    def ehat_differential_residual(self, m: int, b: int) -> TruncSeries:
        """d_log E-hat_{m,b} + E-hat_{m-1,b}; vanishes for m >= 1."""
        res = _d_log(self.ehat(m, b).series, self.inv_dlam) + self.ehat(m - 1, b).series
        return res.truncate(self.M - 2)

    def _audit(self, s: TruncSeries, m: int, b: int):
        """Sum of s over formal p-torsion using the Weierstrass-prepared power sums (second route)."""
        prep = self.prepared()
        total = torsion_sum(s, prep.power_sums)
        tail = power_sum_tail_bound(s.order, self.q, self.sp.p, m, self._vmin0(b))
        cert = min(prep.precision, tail, min_absprec(s))
        if total is None:
            return self.sp.field.zero(cert), cert
        return total.with_absprec(min(total.absprec, cert)), cert

    # --- disc polylogarithms ------------------------------------------------
    def dhat(self, m: int, n: int) -> TruncSeries:
        """Triangular inversion of E-hat_{m,b} = sum_n F1-hat^(b-n)/(b-n)! D-hat_{m,n}."""
        key = (m, n)
        if key in self._dhat:
            return self._dhat[key]
        F1 = self.frame(self.z0)["F1"]
        out = self.ehat(m, n).series
        pw = None
        for k in range(1, n + 1):
            pw = F1 if pw is None else (pw * F1).truncate(self.M)
            out = out - pw * self.dhat(m, n - k) * Fraction(1, math.factorial(k))
        out = out.truncate(self.M)
        self._dhat[key] = out
        return out

    def dhat_oracle(self, n: int) -> TruncSeries:
        """L_n^(p)(z + z0) from the exact theta_p route, composed with lambda(s)."""
        Mz = self.M
        tp = theta_p_series(self.c, self.z0, self.sp, Mz, max(n + 1, 4))
        Lz = embed_series(tp.Lp[n], self.sp, self.R)
        return Lz.compose(self.lam.truncate(Mz))

    def dhat_differential_residual(self, m: int, n: int) -> TruncSeries:
        """d_log D_{m,n} + D_{m-1,n} + D_{m,n-1} (-X - e2*), expected to vanish (m >= 1)."""
        X = self.frame(self.z0)["X"]
        e2 = embed_padic(self.c.require_e2star(), self.sp, self.R)
        res = _d_log(self.dhat(m, n), self.inv_dlam) + self.dhat(m - 1, n)
        if n >= 1:
            res = res + self.dhat(m, n - 1) * (-X - e2)
        return res.truncate(self.M - 2)

    # --- specialization table -----------------------------------------------
    def specialization_table(self, degree: int) -> SpecializationTable:
        omega, omega_star = {}, {}
        for m in range(1, degree + 1):
            k = degree - m
            omega[(m, k)] = self.ehat(m, k + 1).value
        for k in range(1, degree + 1):
            m = degree - k
            omega_star[(m, k)] = self.ehat(m + 1, k).value
        return SpecializationTable(degree, omega, omega_star, [(0, degree)])


@lru_cache(maxsize=8)
def _pipeline(c: CurveData, z0, sp: SplitPrimeData, M: int, N: int, m_max: int) -> DiscPipeline:
    return DiscPipeline(c, z0, sp, M, N, m_max)


def pipeline_for(c: CurveData, z0, sp: SplitPrimeData, M: int, N: int, m_max: int = 4) -> DiscPipeline:
    """Cached pipeline; prime data hashes by identity, so reuse one object per prime."""
    return _pipeline(c, _xy(z0), sp, M, N, m_max)


# --- module-level operations --------------------------------------------------


def fhat(c, z0, b, sp, M, N) -> TruncSeries:
    return pipeline_for(c, z0, sp, M, N).fhat(b)


def fhat_restricted(c, z0, b, sp, M, N) -> TruncSeries:
    return pipeline_for(c, z0, sp, M, N).restricted(b)


def moments_nonneg(c, z0, a, b, sp, M, N):
    return pipeline_for(c, z0, sp, M, N).moment(a, b)


def ehat(c, z0, m, b, sp, M, N) -> EhatSeries:
    return pipeline_for(c, z0, sp, M, N).ehat(m, b)


def dhat_invert(c, z0, m, n, sp, M, N, check_oracle: bool = True) -> TruncSeries:
    pipe = pipeline_for(c, z0, sp, M, N)
    D = pipe.dhat(m, n)
    if m == 0 and check_oracle:
        ref = pipe.dhat_oracle(n)
        if not series_agree(D, ref):
            raise OracleMismatch(f"D-hat_0,{n} disagrees with L_{n}^(p)")
    return D


def specialization_table(c, z0, degree, sp, M, N) -> SpecializationTable:
    return pipeline_for(c, z0, sp, M, N).specialization_table(degree)


def series_agree(a: TruncSeries, b: TruncSeries, through: int | None = None) -> bool:
    """Equal at the precision both sides carry, below the common (or given) order."""
    M = min(a.order, b.order) if through is None else through
    d = a.truncate(M) - b.truncate(M)
    return all(x.r == 0 for x in d.c.values() if isinstance(x, PadicScalar)) and \
        all(x == 0 for x in d.c.values() if not isinstance(x, PadicScalar))


def interpolation_rhs(c: CurveData, z0, a: int, b: int, sp: SplitPrimeData):
    """(-1)^(a+b-1) (e*_{a,b}(z0)/A^a - pi^a e*_{a,b}(pi z0)/(pibar^b A^a)), exactly in K."""
    from .kronecker import ek_exact

    P = _xy(z0)
    Q = cm_mul(c, sp.pi, P)
    e1 = ek_exact(c, P, a, b, sp)
    e2 = ek_exact(c, Q, a, b, sp)
    val = (-1) ** (a + b - 1) * (e1 - sp.pi ** a * e2 / sp.pibar ** b)
    return val.demote() if isinstance(val, AlgebraicNumber) else val


def star_constant(c: CurveData, b: int):
    """c_{b+1}: the z^b coefficient of 1/z - 1/lambda^-1(z)."""
    fg = build_formal_group(c, b + 8)
    inv = fg.lam.truncate(b + 6).reversion()
    t = TruncSeries.monomial(-1, Fraction(1), inv.order) - inv.inverse()
    return t.coeff(b)


def relation_check(pipe: DiscPipeline, b: int, a_max: int = 3) -> bool:
    """F-hat* = F-hat + c_{b+1}: restricted series differ by a constant, so moments a >= 1 agree."""
    cst = star_constant(pipe.c, b)
    shift = embed_padic(cst, pipe.sp, pipe.R)
    plain = pipe.restricted(b + 1)
    star = pipe.restricted(b + 1, star_shift=shift)
    diff = star - plain
    expect = shift * (1 - pipe.pibar(pipe.R + b + 1) ** (-(b + 1)))
    if not series_agree(diff, TruncSeries.const(expect, diff.order, "s")):
        return False
    for a in range(1, a_max + 1):
        if (pipe.moment(a, b + 1, star) - pipe.moment(a, b + 1, plain)).r:
            return False
    return True
