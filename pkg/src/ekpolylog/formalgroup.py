"""Formal group of y^2 = 4x^3 - g2 x - g3 at the parameter s = -2x/y.

With u = -2/y the curve equation becomes u = s^3 - (g2/4) s u^2 - (g3/4) u^3,
which is solved by fixed-point iteration; then x = s/u, y = -2/u and the
normalized logarithm has lambda'(s) = (dx/ds)/y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import CongruenceError, NotIntegral, PrecisionExhausted
from .exactnum import (
    AlgebraicNumber,
    PadicScalar,
    SplitPrimeData,
    embed_padic,
    ledger_record,
)
from .poly import Poly, poly_xgcd
from .series import INF_ORDER, TruncSeries, TruncSeries2
from .weierstrass import CurveData, pi_isogeny


@dataclass(frozen=True, eq=False)
class FormalGroupData:
    curve: CurveData
    order: int
    x: TruncSeries
    y: TruncSeries
    lam: TruncSeries
    dlam: TruncSeries

    def group_law(self, orders=(8, 8)) -> TruncSeries2:
        """F(s, t) = lambda^-1(lambda(s) + lambda(t)) on the rectangle ``orders``."""
        return _group_law(self.curve, orders)

    def lam_inverse(self, M: int | None = None) -> TruncSeries:
        M = self.order if M is None else min(M, self.order)
        return self.lam.truncate(M).reversion()


@lru_cache(maxsize=16)
def _formal_exact(c: CurveData, M: int):
    W = M + 8
    s = TruncSeries({1: Fraction(1)}, W, "s")
    s3 = TruncSeries({3: Fraction(1)}, W, "s")
    a2, a3 = c.g2 / 4, c.g3 / 4
    u = s3
    for _ in range(W // 4 + 2):
        nxt = (s3 - s * u * u * a2 - u * u * u * a3).truncate(W)
        if nxt.agrees_with(u, W):
            u = nxt
            break
        u = nxt
    x = s / u
    y = u.inverse() * Fraction(-2)
    dlam = (x.derivative() / y).truncate(M)
    lam = dlam.truncate(M - 1).integral()
    return x.truncate(M - 2), y.truncate(M - 3), lam, dlam


def build_formal_group(c: CurveData, M: int) -> FormalGroupData:
    """x(s), y(s), lambda(s) and lambda'(s) over K, lambda known below s^M."""
    if M < 5:
        raise ValueError("order must be at least 5")
    x, y, lam, dlam = _formal_exact(c, M)
    return FormalGroupData(c, M, x, y, lam, dlam)


def compose2(f: TruncSeries, G: TruncSeries2) -> TruncSeries2:
    """f(G) for a power series f and a two-variable series G without constant term."""
    ks = sorted(k for k in f.c)
    if ks and ks[0] < 0:
        raise ValueError("outer series must be a power series")
    top = min(f.order - 1, max(ks) if ks else 0)
    acc = TruncSeries2({(0, 0): f.c.get(top, 0)}, G.orders, G.vars)
    for k in range(top - 1, -1, -1):
        acc = acc * G + f.c.get(k, 0)
    return acc.truncate(G.orders)


@lru_cache(maxsize=16)
def _group_law(c: CurveData, orders):
    Mu, Mv = orders
    M = Mu + Mv + 2
    fg = build_formal_group(c, M)
    lam = fg.lam
    inv = lam.reversion()
    U = TruncSeries2.from_u(lam.with_var("s").truncate(Mu), ("s", "t")) + \
        TruncSeries2.from_v(lam.truncate(Mv), ("s", "t"))
    U = U.truncate(orders)
    return compose2(inv, U)


# ---------------------------------------------------------------------------
# p-adic images
# ---------------------------------------------------------------------------


def embed_series(f: TruncSeries, sp: SplitPrimeData, N: int) -> TruncSeries:
    """Coefficientwise p-adic image (exact scalars only)."""
    return TruncSeries({k: embed_padic(a, sp, N) for k, a in f.c.items()}, f.order, f.var)


def pi_image(sp: SplitPrimeData, N: int) -> PadicScalar:
    return embed_padic(sp.pi, sp, N)


def min_absprec(f: TruncSeries) -> int:
    vals = [a.absprec for a in f.c.values() if isinstance(a, PadicScalar)]
    return min(vals) if vals else 10 ** 9


def guard_digits(p: int, M: int) -> int:
    return 3 + 2 * max(1, math.ceil(math.log(max(M, 2), p)))


@dataclass(frozen=True, eq=False)
class FormalPi:
    series: TruncSeries
    sp: SplitPrimeData
    precision: int


def formal_pi(fg: FormalGroupData, sp: SplitPrimeData, N: int, M: int, check_through: int | None = None) -> FormalPi:
    """[pi](s) = lambda^-1(pi lambda(s)) over the p-adic field, known below s^M to precision N.

    Solved by Newton iteration on lambda(h) = pi lambda(s); only lambda (with
    denominators k) and the unit series lambda' are needed, so precision loss
    is bounded by log_p M.  Integrality and the Frobenius congruence
    [pi](s) = s^N(p) mod p are verified on every coefficient below ``check_through``.
    """
    if M > fg.order:
        fg = build_formal_group(fg.curve, M)
    R = N + guard_digits(sp.p, M)
    for _ in range(3):
        h = _newton_pi(fg, sp, R, M)
        got = min_absprec(h)
        if got >= N:
            break
        R += R - got + 2
    else:
        raise PrecisionExhausted(f"[pi](s) reached precision {got}, wanted {N}")
    h = h.map(lambda a: a.with_absprec(N))
    ledger_record("formal_pi", R, min_absprec(h))
    _check_integral_and_congruent(h, sp, check_through if check_through is not None else M)
    return FormalPi(h, sp, N)


@lru_cache(maxsize=16)
def _lam_padic(fg: FormalGroupData, sp_key, sp, R, M):
    lam = embed_series(fg.lam.truncate(M), sp, R)
    dlam = embed_series(fg.dlam.truncate(M - 1), sp, R)
    return lam, dlam


def lam_padic(fg: FormalGroupData, sp: SplitPrimeData, R: int, M: int):
    return _lam_padic(fg, (sp.p, str(sp.pi)), sp, R, M)


def _newton_pi(fg, sp, R, M):
    lam, dlam = lam_padic(fg, sp, R, M)
    pim = pi_image(sp, R)
    target = lam * pim
    h = TruncSeries({1: pim}, 2, "s")
    n = 2
    while n < M:
        n2 = min(2 * n, M)
        hh = TruncSeries(h.c, n2, "s")
        e = lam.truncate(n2).compose(hh) - target.truncate(n2)
        d = dlam.truncate(n2 - 1).compose(hh)
        corr = (e.truncate(n2) * d.inverse()).truncate(n2)
        h = TruncSeries((hh - corr).c, n2, "s")
        n = n2
    return h


def _check_integral_and_congruent(h: TruncSeries, sp: SplitPrimeData, through: int):
    q = sp.norm
    for k in range(1, min(through, h.order)):
        a = h.coeff(k)
        if not isinstance(a, PadicScalar):
            continue
        if a.r and a.v < 0:
            raise NotIntegral(f"coefficient of s^{k} of [pi](s) has valuation {a.v}; try a unit multiple of pi")
        if a.absprec < 1:
            continue
        res = a.residue()
        expect = (1,) + (0,) * (sp.field.f - 1) if k == q else (0,) * sp.field.f
        if res != expect:
            raise CongruenceError(
                f"[pi](s) is not s^{q} mod p at s^{k}; multiply pi by a unit of O_K")


def frobenius_congruence_holds(fpi: FormalPi, through: int) -> bool:
    try:
        _check_integral_and_congruent(fpi.series, fpi.sp, through)
    except (CongruenceError, NotIntegral):
        return False
    return True


def reduction_lowest_term(fpi: FormalPi) -> int:
    """Exponent of the first unit coefficient of [pi](s) (the height test)."""
    for k in sorted(fpi.series.c):
        a = fpi.series.c[k]
        if a.r and a.v == 0:
            return k
    raise PrecisionExhausted("no unit coefficient within the known order")


def padic_compose_check(fg: FormalGroupData, fpi: FormalPi, M: int) -> bool:
    """lambda([pi](s)) = pi lambda(s) at the precision of [pi](s)."""
    sp, N = fpi.sp, fpi.precision
    lam, _ = lam_padic(fg, sp, N + guard_digits(sp.p, M), M)
    lhs = lam.truncate(M).compose(fpi.series.truncate(M))
    rhs = lam.truncate(M) * pi_image(sp, N + 4)
    d = lhs - rhs
    loss = max(0, math.floor(math.log(max(M, 2), sp.p)))
    return all(a.r == 0 or a.v >= N - loss for a in d.c.values())


# ---------------------------------------------------------------------------
# Weierstrass preparation and torsion power sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistinguishedPoly:
    """Monic P(s) of degree N(p) with [pi](s) = U(s) P(s), plus root power sums p_0..p_cutoff."""

    coeffs: tuple
    unit: TruncSeries
    power_sums: tuple
    precision: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def newton_power_sums(coeffs, cutoff: int):
    """Power sums p_0..p_cutoff of the roots of the monic polynomial sum coeffs[i] s^i."""
    n = len(coeffs) - 1
    c = list(coeffs)
    ps = [n]
    for k in range(1, cutoff + 1):
        acc = None
        for i in range(1, min(k, n + 1)):
            t = c[n - i] * ps[k - i]
            acc = t if acc is None else acc + t
        if k <= n:
            t = c[n - k] * k
            acc = t if acc is None else acc + t
        ps.append(-acc)
    return ps


def prepare_and_power_sums(piS: TruncSeries, cutoff: int, degree: int | None = None) -> DistinguishedPoly:
    """p-adic Weierstrass preparation of [pi](s) and Newton power sums of its roots.

    Each pass of V <- (1 - H(V f_low)) / f_high gains one p-adic digit and
    consumes ``degree`` orders of the input, so the certified precision is the
    number of passes the truncation order allows.
    """
    ks = sorted(piS.c)
    if degree is None:
        degree = next(k for k in ks if piS.c[k].r and piS.c[k].v == 0)
    n = degree
    if piS.order < 2 * n + 1:
        raise PrecisionExhausted("truncation order too small for Weierstrass preparation")
    low = TruncSeries({k: a for k, a in piS.c.items() if k < n}, INF_ORDER, "s")
    high = TruncSeries({k - n: a for k, a in piS.c.items() if k >= n}, piS.order - n, "s")
    hinv = high.inverse()
    target = max(a.absprec for a in piS.c.values())
    V = hinv
    passes = 0
    while True:
        prod = V * low
        H = TruncSeries({k - n: a for k, a in prod.c.items() if k >= n}, prod.order - n, "s")
        Vn = ((1 - H) * hinv)
        passes += 1
        if Vn.order < n or passes >= target:
            V = Vn if Vn.order >= n else V
            break
        V = Vn
    prec = min(passes, target)
    Pser = (V.truncate(n) * low).truncate(n)
    coeffs = [Pser.coeff(k).with_absprec(prec) if isinstance(Pser.coeff(k), PadicScalar) else Pser.coeff(k)
              for k in range(n)]
    one = piS.c[n].F.from_rational(1, prec)
    coeffs.append(one)
    U = high * V.inverse() if V.order > 0 else high
    ps = newton_power_sums(coeffs, cutoff)
    ledger_record("weierstrass_preparation", target, prec)
    return DistinguishedPoly(tuple(coeffs), U, tuple(ps), prec)


@lru_cache(maxsize=16)
def _exact_torsion_data(c: CurveData, pi_key: str, p: int):
    from .weierstrass import _pi_from_key
    from .exactnum import make_prime_data

    sp = make_prime_data(c.K, p, _pi_from_key(c, pi_key))
    iso = pi_isogeny(c, sp)
    P = iso.kernel_poly
    m = P.deg
    # power sums of the x-roots
    xs = newton_power_sums(list(P.c), 3 * m + 3)
    f = c.f_poly
    g, a, _ = poly_xgcd(f % P, P)
    if g.deg != 0:
        raise ArithmeticError("kernel polynomial shares a root with the 2-division polynomial")
    finv = a % P
    q = (Poly([0, 0, 4]) * finv) % P
    return P, xs, q


def _trace(r: Poly, xs):
    acc = 0
    for i, a in enumerate(r.c):
        acc = acc + a * xs[i]
    return acc


def exact_torsion_power_sums(c: CurveData, sp: SplitPrimeData, kmax: int):
    """sum over the formal p-torsion s1 = -2x/y (s1 = 0 included) of s1^k, exactly in K.

    Nonzero roots pair as +-s1 with s1^2 = 4x^2/f(x) over the roots x of the
    kernel polynomial, so odd power sums vanish and p_2j = 2 Tr(q^j) with
    q = 4x^2/f(x) in K[x]/(P).
    """
    from .weierstrass import _pi_key

    P, xs, q = _exact_torsion_data(c, _pi_key(sp.pi), sp.p)
    out = [Fraction(sp.norm)]
    r = Poly([1])
    for k in range(1, kmax + 1):
        if k % 2:
            out.append(Fraction(0))
            continue
        r = (r * q) % P
        t = 2 * _trace(r, xs)
        out.append(t.demote() if isinstance(t, AlgebraicNumber) else t)
    return out


def exact_distinguished_poly(c: CurveData, sp: SplitPrimeData) -> Poly:
    """s * prod_x (s^2 - 4x^2/f(x)) over the roots x of the kernel polynomial, in K[s]."""
    from .weierstrass import _pi_key

    P, xs, q = _exact_torsion_data(c, _pi_key(sp.pi), sp.p)
    m = P.deg
    # characteristic polynomial of q via its power sums (Newton inverse)
    pw = []
    r = Poly([1])
    for _ in range(m):
        r = (r * q) % P
        pw.append(_trace(r, xs))
    e = [Fraction(1)]
    for k in range(1, m + 1):
        acc = 0
        for i in range(1, k + 1):
            acc = acc + (-1) ** (i - 1) * e[k - i] * pw[i - 1]
        e.append(acc / k)
    # R(t) = sum (-1)^k e_k t^(m-k)
    coeffs = [0] * (2 * m + 2)
    for k in range(m + 1):
        coeffs[2 * (m - k) + 1] = (-1) ** k * e[k]
    return Poly(coeffs)


@lru_cache(maxsize=32)
def _padic_power_sums(c: CurveData, pi_key: str, p: int, kmax: int, N: int):
    from .exactnum import make_prime_data
    from .weierstrass import _pi_from_key

    sp = make_prime_data(c.K, p, _pi_from_key(c, pi_key))
    ex = exact_torsion_power_sums(c, sp, kmax)
    return tuple(embed_padic(t, sp, N) for t in ex)


def torsion_power_sums(c: CurveData, sp: SplitPrimeData, kmax: int, N: int):
    """p-adic images of the exact formal p-torsion power sums p_0..p_kmax."""
    from .weierstrass import _pi_key

    return _padic_power_sums(c, _pi_key(sp.pi), sp.p, kmax, N)


def torsion_sum(f: TruncSeries, power_sums) -> object:
    """sum over formal p-torsion of f(s1) for a power series f, truncated at its known order."""
    acc = None
    for k, a in f.c.items():
        if k < 0:
            raise ValueError("torsion sums need a power series")
        t = a * power_sums[k]
        acc = t if acc is None else acc + t
    return acc


def power_sum_tail_bound(order: int, q: int, p: int, m: int, vmin: int = 0, horizon: int | None = None) -> int:
    """Lower bound for v(coeff_k p_k), k >= order, when coefficients lose at most m floor(log_p k) digits.

    Uses v(p_k) >= ceil(k / (q - 1)) for the nonzero formal torsion points of N(p) = q.
    """
    horizon = horizon or order + (q - 1) * (4 * m + 16)
    best = None
    for k in range(order, horizon):
        lg = 0
        t = k
        while t >= p:
            t //= p
            lg += 1
        val = -(-k // (q - 1)) - m * lg + vmin
        best = val if best is None else min(best, val)
    return best
