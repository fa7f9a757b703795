"""Weierstrass functions, curve arithmetic, torsion, the [pi] isogeny and algebraization.

The curve model is y^2 = 4x^3 - g2 x - g3, uniformized by x = wp(z), y = wp'(z).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .errors import ConfigError, CrossCheckError, FieldError, NotElliptic
from .exactnum import (
    QQ,
    AlgebraicNumber,
    SplitPrimeData,
    embed_complex,
    extend_by_root,
    factor_poly,
    field_of,
    make_prime_data,
    parse_exact,
    quadratic_field,
    serialize_exact,
)
from .poly import Poly, poly_gcd
from .series import TruncSeries

# ---------------------------------------------------------------------------
# Curve data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveData:
    """y^2 = 4x^3 - g2 x - g3 with optional CM data."""

    g2: object
    g3: object
    d: int | None = None
    e2star: object = None
    name: str = "custom"
    prime: int | None = None
    pi: object = None

    def __post_init__(self):
        if self.discriminant == 0:
            raise ConfigError("singular curve: g2^3 - 27 g3^2 = 0")
        if self.d in (1, 3):
            if self.e2star not in (None, 0):
                raise ConfigError("e2* must vanish for d in {1, 3}")
            object.__setattr__(self, "e2star", Fraction(0))
        if self.d == 1 and self.g3 != 0:
            raise ConfigError("d = 1 requires g3 = 0 in this model")
        if self.d == 3 and self.g2 != 0:
            raise ConfigError("d = 3 requires g2 = 0 in this model")

    @property
    def discriminant(self):
        return self.g2 ** 3 - 27 * self.g3 ** 2

    @property
    def K(self):
        return quadratic_field(self.d) if self.d else QQ

    @property
    def f_poly(self) -> Poly:
        return Poly([-self.g3, -self.g2, Fraction(0), Fraction(4)])

    def rhs(self, x):
        return 4 * x ** 3 - self.g2 * x - self.g3

    def require_e2star(self):
        if self.e2star is None:
            raise ConfigError(f"curve {self.name} has no e2* value")
        return self.e2star

    def prime_data(self, p: int | None = None, pi=None) -> SplitPrimeData:
        p = p if p is not None else self.prime
        pi = pi if pi is not None else self.pi
        if p is None or pi is None:
            raise ConfigError(f"curve {self.name} has no default prime")
        return make_prime_data(self.K, p, pi)

    def key(self):
        return (serialize_exact(self.g2), serialize_exact(self.g3), self.d,
                None if self.e2star is None else serialize_exact(self.e2star))


_K_ELEMENT = re.compile(r"^\s*([+-]?[0-9/]+)?\s*(?:([+-])\s*([0-9/]*)\s*\*?\s*i)?\s*$")


def parse_k_element(text: str, K):
    """Parse ``a``, ``a/b``, ``a+bi`` or ``bi``; ``i`` stands for sqrt(-d)."""
    t = text.strip().replace(" ", "")
    if t in ("i", "+i"):
        return K.gen()
    if t == "-i":
        return -K.gen()
    if t.endswith("i"):
        if K is QQ:
            raise ConfigError(f"{text!r} needs an imaginary quadratic field")
        body = t[:-1].rstrip("*")
        m = re.match(r"^([+-]?[0-9/]+)?([+-])([0-9/]*)$", body)
        if m is None:
            b = Fraction(body) if body not in ("", "+", "-") else Fraction(f"{body}1")
            return K.element([0, b])
        a = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        b = Fraction(m.group(3)) if m.group(3) else Fraction(1)
        if m.group(2) == "-":
            b = -b
        return K.element([a, b])
    if t.startswith("("):
        return parse_exact(t, K)
    try:
        return Fraction(t)
    except ValueError as exc:
        raise ConfigError(f"cannot parse field element {text!r}") from exc


def parse_presets(text: str) -> dict:
    """Curve presets: one curve per line, whitespace separated key=value pairs."""
    allowed = {"name", "g2", "g3", "d", "e2star", "prime", "pi"}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        kv = {}
        for tok in line.split():
            if "=" not in tok:
                raise ConfigError(f"preset line {lineno}: expected key=value, got {tok!r}")
            k, v = tok.split("=", 1)
            if k not in allowed:
                raise ConfigError(f"preset line {lineno}: unknown key {k!r}")
            kv[k] = v
        if "name" not in kv or "g2" not in kv or "g3" not in kv:
            raise ConfigError(f"preset line {lineno}: name, g2 and g3 are required")
        d = int(kv["d"]) if "d" in kv else None
        K = quadratic_field(d) if d else QQ
        out[kv["name"]] = CurveData(
            g2=parse_k_element(kv["g2"], K),
            g3=parse_k_element(kv["g3"], K),
            d=d,
            e2star=parse_k_element(kv["e2star"], K) if "e2star" in kv else None,
            name=kv["name"],
            prime=int(kv["prime"]) if "prime" in kv else None,
            pi=parse_k_element(kv["pi"], K) if "pi" in kv else None,
        )
    return out


@lru_cache(maxsize=None)
def shipped_presets() -> dict:
    text = resources.files("ekpolylog").joinpath("data/curves.txt").read_text()
    return parse_presets(text)


def preset(name: str) -> CurveData:
    try:
        return shipped_presets()[name]
    except KeyError:
        raise ConfigError(f"unknown curve preset {name!r}") from None


# ---------------------------------------------------------------------------
# sigma and its derived functions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _sigma_table(maxdeg: int):
    """Rational a_{m,n} for 4m+6n <= maxdeg.

    a_{m,n} = 3(m+1) a_{m+1,n-1} + 16/3 (n+1) a_{m-2,n+1}
              - 1/3 (2m+3n-1)(4m+6n-1) a_{m-1,n},  a_{0,0} = 1.
    """
    a = {(0, 0): Fraction(1)}

    def get(m, n):
        if m < 0 or n < 0:
            return Fraction(0)
        return a.get((m, n), Fraction(0))

    for deg in range(2, maxdeg + 1, 2):
        for n in range(deg // 6 + 1):
            rest = deg - 6 * n
            if rest % 4:
                continue
            m = rest // 4
            val = (3 * (m + 1) * get(m + 1, n - 1)
                   + Fraction(16, 3) * (n + 1) * get(m - 2, n + 1)
                   - Fraction((2 * m + 3 * n - 1) * (4 * m + 6 * n - 1), 3) * get(m - 1, n))
            a[(m, n)] = val
    return a


def sigma_series(c: CurveData, M: int) -> TruncSeries:
    """Taylor expansion of sigma(z) known below z^M."""
    if M < 2:
        raise ValueError("order must be at least 2")
    table = _sigma_table(max(M, 2))
    out = {}
    for (m, n), a in table.items():
        k = 4 * m + 6 * n + 1
        if k >= M or a == 0:
            continue
        out[k] = out.get(k, 0) + Fraction(2) ** (n - m) * a * c.g2 ** m * c.g3 ** n / math.factorial(k)
    return TruncSeries(out, M, "z")


@dataclass(frozen=True)
class WPFamily:
    wp: TruncSeries
    dwp: TruncSeries
    zeta: TruncSeries
    F1: TruncSeries
    sigma: TruncSeries


@lru_cache(maxsize=64)
def _wp_family_cached(c: CurveData, M: int) -> WPFamily:
    sigma = sigma_series(c, M + 4)
    zeta = sigma.derivative() / sigma
    wp = -zeta.derivative()
    dwp = wp.derivative()
    e2 = c.e2star if c.e2star is not None else 0
    F1 = zeta - TruncSeries({1: e2}, zeta.order)
    return WPFamily(wp.truncate(M), dwp.truncate(M), zeta.truncate(M), F1.truncate(M), sigma.truncate(M))


def wp_family(c: CurveData, M: int) -> WPFamily:
    """wp, wp', zeta, F1 = zeta - e2* z (and sigma), all known below z^M."""
    if M < 2:
        raise ValueError("order must be at least 2")
    return _wp_family_cached(c, M)


def weierstrass_ode_residual(c: CurveData, M: int) -> TruncSeries:
    fam = wp_family(c, M)
    wp, dwp = fam.wp, fam.dwp
    return dwp * dwp - (4 * wp * wp * wp - c.g2 * wp - c.g3)


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

O = None  # the point at infinity


def on_curve(c: CurveData, P) -> bool:
    if P is None:
        return True
    x, y = _xy(P)
    return y * y == c.rhs(x)


def _xy(P):
    if isinstance(P, TorsionPoint):
        return P.x, P.y
    if P is None:
        return None
    return tuple(Fraction(a) if isinstance(a, int) else a for a in P)


def _demote(x):
    return x.demote() if isinstance(x, AlgebraicNumber) else x


def curve_add(c: CurveData, P, Q):
    """Chord-tangent sum on y^2 = 4x^3 - g2 x - g3; None is the identity."""
    if P is None:
        return None if Q is None else _xy(Q)
    if Q is None:
        return _xy(P)
    x1, y1 = _xy(P)
    x2, y2 = _xy(Q)
    if x1 == x2:
        if y1 == -y2:
            return None
        lam = (12 * x1 * x1 - c.g2) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam / 4 - x1 - x2
    y3 = -(y1 + lam * (x3 - x1))
    return (_demote(x3), _demote(y3))


def curve_neg(P):
    if P is None:
        return None
    x, y = _xy(P)
    return (x, _demote(-y))


def curve_mul(c: CurveData, n: int, P):
    if n < 0:
        return curve_neg(curve_mul(c, -n, P))
    result, base = None, (None if P is None else _xy(P))
    while n:
        if n & 1:
            result = curve_add(c, result, base)
        n >>= 1
        if n:
            base = curve_add(c, base, base)
    return result


def _ok_coords(c: CurveData, alpha):
    """Write alpha in O_K as a + b*u with u the CM unit ([i] or [zeta3])."""
    if isinstance(alpha, (int, Fraction)):
        a = Fraction(alpha)
        if a.denominator != 1:
            raise FieldError("not an algebraic integer")
        return int(a), 0
    if not isinstance(alpha, AlgebraicNumber) or alpha.field is not c.K:
        raise FieldError("CM multiplier must lie in K")
    c0, c1 = alpha.coords
    if c.d == 1:
        a, b = c0, c1
    elif c.d == 3:
        a, b = c0 + c1, 2 * c1
    else:
        raise FieldError("CM action implemented for d = 1 and d = 3 only")
    if a.denominator != 1 or b.denominator != 1:
        raise FieldError("not an algebraic integer")
    return int(a), int(b)


def cm_unit(c: CurveData):
    K = c.K
    if c.d == 1:
        return K.gen()
    if c.d == 3:
        return (K.gen() - 1) / 2
    raise FieldError("no extra units")


def cm_unit_action(c: CurveData, P):
    """[i](x,y) = (-x, i y) for d = 1; [zeta3](x,y) = (zeta3 x, y) for d = 3."""
    if P is None:
        return None
    x, y = _xy(P)
    u = cm_unit(c)
    if c.d == 1:
        return (_demote(-x), _demote(u * y))
    return (_demote(u * x), y)


def cm_mul(c: CurveData, alpha, P):
    a, b = _ok_coords(c, alpha)
    Q = curve_mul(c, a, P)
    if b:
        Q = curve_add(c, Q, curve_mul(c, b, cm_unit_action(c, P)))
    return Q


# ---------------------------------------------------------------------------
# Rational functions on the curve
# ---------------------------------------------------------------------------


class RatFunc:
    """Reduced quotient num/den of polynomials in x, den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, reduce: bool = True):
        den = Poly([1]) if den is None else den
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num, self.den = Poly(), Poly([1])
            return
        if reduce and den.deg > 0:
            g = poly_gcd(num, den)
            if g.deg > 0:
                num, den = num // g, den // g
        lc = den.lc
        if lc != 1:
            inv = Fraction(1, lc) if isinstance(lc, int) else 1 / lc
            num, den = num * inv, den * inv
        self.num, self.den = num, den

    @classmethod
    def const(cls, a):
        return cls(Poly([a]))

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, o):
        o = o if isinstance(o, RatFunc) else RatFunc.const(o)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, o):
        return self + (-(o if isinstance(o, RatFunc) else RatFunc.const(o)))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, RatFunc):
            return RatFunc(self.num * o, self.den, reduce=False)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num, reduce=False)

    def __truediv__(self, o):
        if isinstance(o, RatFunc):
            return self * o.inverse()
        return self * (Fraction(1, o) if isinstance(o, int) else 1 / o)

    def __eq__(self, o):
        o = o if isinstance(o, RatFunc) else RatFunc.const(o)
        return self.num == o.num and self.den == o.den

    __hash__ = None

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def compose_neg(self):
        """r(-x)."""
        return RatFunc(self.num.scale_var(-1), self.den.scale_var(-1))

    def __repr__(self):
        return f"RatFunc({self.num!r} / {self.den!r})"


class RationalMap:
    """U(x) + y V(x) in K(x)[y]/(y^2 - (4x^3 - g2 x - g3))."""

    __slots__ = ("U", "V", "curve")

    def __init__(self, U: RatFunc, V: RatFunc, curve: CurveData):
        self.U, self.V, self.curve = U, V, curve

    @classmethod
    def from_polys(cls, u: Poly, v: Poly, curve):
        return cls(RatFunc(u), RatFunc(v), curve)

    @classmethod
    def x(cls, curve):
        return cls(RatFunc(Poly([0, 1])), RatFunc(Poly()), curve)

    @classmethod
    def y(cls, curve):
        return cls(RatFunc(Poly()), RatFunc(Poly([1])), curve)

    @classmethod
    def const(cls, a, curve):
        return cls(RatFunc.const(a), RatFunc(Poly()), curve)

    def _f(self):
        return RatFunc(self.curve.f_poly)

    def __add__(self, o):
        o = o if isinstance(o, RationalMap) else RationalMap.const(o, self.curve)
        return RationalMap(self.U + o.U, self.V + o.V, self.curve)

    __radd__ = __add__

    def __neg__(self):
        return RationalMap(-self.U, -self.V, self.curve)

    def __sub__(self, o):
        o = o if isinstance(o, RationalMap) else RationalMap.const(o, self.curve)
        return self + (-o)

    def __mul__(self, o):
        if not isinstance(o, RationalMap):
            return RationalMap(self.U * o, self.V * o, self.curve)
        f = self._f()
        return RationalMap(self.U * o.U + f * self.V * o.V, self.U * o.V + self.V * o.U, self.curve)

    __rmul__ = __mul__

    def inverse(self):
        f = self._f()
        n = self.U * self.U - f * self.V * self.V
        ni = n.inverse()
        return RationalMap(self.U * ni, -self.V * ni, self.curve)

    def __truediv__(self, o):
        if isinstance(o, RationalMap):
            return self * o.inverse()
        return self * (Fraction(1, o) if isinstance(o, int) else 1 / o)

    def __eq__(self, o):
        if not isinstance(o, RationalMap):
            o = RationalMap.const(o, self.curve)
        return self.U == o.U and self.V == o.V

    __hash__ = None

    def is_polynomial(self) -> bool:
        return self.U.den.deg == 0 and self.V.den.deg == 0

    def evaluate(self, P):
        """Value at an affine point (x0, y0)."""
        x0, y0 = _xy(P)
        val = self.U(x0)
        if not self.V.is_zero():
            val = val + y0 * self.V(x0)
        return _demote(val)

    def evaluate_series(self, X: TruncSeries, Y: TruncSeries) -> TruncSeries:
        """Substitute series for x and y (e.g. wp(z+z0), wp'(z+z0))."""
        out = self.U.num(X) / self.U.den(X) if not self.U.is_zero() else 0 * X
        if not self.V.is_zero():
            out = out + Y * (self.V.num(X) / self.V.den(X))
        return out

    def expansion(self, M: int) -> TruncSeries:
        """Laurent expansion at z = 0 known below z^M."""
        c = self.curve
        pole = 2 * max(self.U.num.deg, self.V.num.deg + 2, 0)
        extra = pole + 2 * (self.U.den.deg + self.V.den.deg) + 8
        work = M + extra
        while True:
            fam = wp_family(c, work)
            s = self.evaluate_series(fam.wp, fam.dwp)
            if s.order >= M:
                return s.truncate(M)
            work += M - s.order + 4

    def format(self) -> str:
        """Human-readable form in the symbols wp, dwp (polynomial maps only)."""
        if not self.is_polynomial():
            return f"({_fmt_poly(self.U.num)})/({_fmt_poly(self.U.den)}) + dwp*({_fmt_poly(self.V.num)})/({_fmt_poly(self.V.den)})"
        parts = []
        for k, a in enumerate(self.U.num.c):
            if a != 0:
                parts.append(_fmt_term(a, "wp", k))
        for k, a in enumerate(self.V.num.c):
            if a != 0:
                parts.append(_fmt_term(a, "wp", k, "dwp"))
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"RationalMap({self.format()})"


def _fmt_term(a, sym, k, extra=None):
    mon = []
    if k == 1:
        mon.append(sym)
    elif k > 1:
        mon.append(f"{sym}^{k}")
    if extra:
        mon.append(extra)
    coef = serialize_exact(a) if not isinstance(a, AlgebraicNumber) else serialize_exact(a)
    if not mon:
        return coef
    if coef == "1":
        return "*".join(mon)
    if coef == "-1":
        return "-" + "*".join(mon)
    return coef + "*" + "*".join(mon)


def _fmt_poly(p: Poly):
    return " + ".join(_fmt_term(a, "wp", k) for k, a in enumerate(p.c) if a != 0) or "0"


# ---------------------------------------------------------------------------
# Division polynomials and multiplication maps
# ---------------------------------------------------------------------------


class _FF:
    """u(x) + y v(x) with polynomial u, v (division polynomial arithmetic)."""

    __slots__ = ("u", "v", "f")

    def __init__(self, u, v, f):
        self.u, self.v, self.f = u, v, f

    def __mul__(self, o):
        return _FF(self.u * o.u + self.f * self.v * o.v, self.u * o.v + self.v * o.u, self.f)

    def __sub__(self, o):
        return _FF(self.u - o.u, self.v - o.v, self.f)

    def __pow__(self, n):
        r = _FF(Poly([1]), Poly(), self.f)
        for _ in range(n):
            r = r * self
        return r


@lru_cache(maxsize=None)
def _division_polys(c: CurveData, nmax: int):
    f = c.f_poly
    g2, g3 = c.g2, c.g3
    psi = {
        0: _FF(Poly(), Poly(), f),
        1: _FF(Poly([1]), Poly(), f),
        2: _FF(Poly(), Poly([-1]), f),
        3: _FF(Poly([-g2 * g2 / 16, -3 * g3, -Fraction(3, 2) * g2, 0, 3]), Poly(), f),
        4: _FF(Poly(), -Poly([-g3 * g3 + g2 ** 3 / 32, -g2 * g3 / 2, -Fraction(5, 8) * g2 * g2,
                             -10 * g3, -Fraction(5, 2) * g2, 0, 2]), f),
    }

    def get(n):
        if n in psi:
            return psi[n]
        if n % 2:
            m = (n - 1) // 2
            val = get(m + 2) * get(m) ** 3 - get(m - 1) * get(m + 1) ** 3
        else:
            m = n // 2
            num = get(m) * (get(m + 2) * get(m - 1) ** 2 - get(m - 2) * get(m + 1) ** 2)
            if not num.v.is_zero():
                raise ArithmeticError("division polynomial recurrence lost parity")
            q, r = num.u.divmod(f)
            if not r.is_zero():
                raise ArithmeticError("division polynomial recurrence not divisible by the cubic")
            val = _FF(Poly(), -q, f)
        psi[n] = val
        return val

    for n in range(nmax + 1):
        get(n)
    return psi


def division_polynomial(c: CurveData, n: int):
    """psi_n as (u, v) with psi_n = u(x) + y v(x); psi_n(z) = sigma(nz)/sigma(z)^(n^2)."""
    psi = _division_polys(c, max(n, 4))[n]
    return psi.u, psi.v


def _xy_poly_pair(c, n):
    """x([n]P) as RatFunc and y([n]P)/y as RatFunc, n >= 1."""
    psi = _division_polys(c, 2 * n + 2)
    pm, pn, pp = psi[n - 1], psi[n], psi[n + 1]
    num = pm * pp
    den = pn * pn
    X = RatFunc(Poly([0, 1])) - RatFunc(num.u, den.u)
    p2n = psi[2 * n]
    d4 = den * den
    Yv = RatFunc(p2n.v, d4.u)
    return X, Yv


def mult_map(c: CurveData, n: int):
    """[n] as (X(x), S(x)) with [n](x, y) = (X(x), y S(x))."""
    if n == 0:
        raise ValueError("[0] is not a map to affine points")
    X, S = _xy_poly_pair(c, abs(n))
    return (X, -S) if n < 0 else (X, S)


def _add_maps(c, A, B):
    """Sum of maps given as (X, S) with y-coordinate y*S."""
    X1, S1 = A
    X2, S2 = B
    f = RatFunc(c.f_poly)
    lam = (S1 - S2) / (X1 - X2)
    X3 = f * lam * lam / 4 - X1 - X2
    S3 = -(S1 + lam * (X3 - X1))
    return X3, S3


@lru_cache(maxsize=None)
def _pi_map(c: CurveData, pi_key):
    pi = _pi_from_key(c, pi_key)
    a, b = _ok_coords(c, pi)
    parts = []
    if a:
        parts.append(mult_map(c, a))
    if b:
        Xb, Sb = mult_map(c, b)
        if c.d == 1:
            u = cm_unit(c)
            parts.append((Xb.compose_neg(), Sb.compose_neg() * u))
        else:
            z3 = cm_unit(c)
            Xs = RatFunc(Xb.num.scale_var(z3), Xb.den.scale_var(z3))
            Ss = RatFunc(Sb.num.scale_var(z3), Sb.den.scale_var(z3))
            parts.append((Xs, Ss))
    if not parts:
        raise ValueError("pi must be nonzero")
    X, S = parts[0]
    if len(parts) == 2:
        X, S = _add_maps(c, parts[0], parts[1])
    return X, S


def _pi_key(pi):
    return serialize_exact(pi)


def _pi_from_key(c, key):
    return parse_exact(key, c.K) if key.startswith("(") else Fraction(key)


@dataclass(frozen=True)
class IsogenyData:
    X: RatFunc
    S: RatFunc
    kernel_poly: Poly
    norm: int

    def as_map(self, c):
        return RationalMap(self.X, RatFunc(Poly())), RationalMap(RatFunc(Poly()), self.S, c)


def pi_isogeny(c: CurveData, sp: SplitPrimeData) -> IsogenyData:
    """[pi] as a rational map and its kernel polynomial P_pi(x)."""
    X, S = _pi_map(c, _pi_key(sp.pi))
    den = X.den
    P = poly_gcd(den, den.derivative()) if den.deg > 0 else Poly([1])
    if den.deg > 0 and not (P * P == den):
        raise CrossCheckError("denominator of x o [pi] is not a square")
    if P.deg != (sp.norm - 1) // 2:
        raise CrossCheckError(f"kernel polynomial has degree {P.deg}, expected {(sp.norm - 1) // 2}")
    return IsogenyData(X, S, P, sp.norm)


def apply_isogeny(c: CurveData, iso: IsogenyData, P):
    if P is None:
        return None
    x0, y0 = _xy(P)
    if iso.X.den(x0) == 0:
        return None
    return (_demote(iso.X(x0)), _demote(y0 * iso.S(x0)))


@lru_cache(maxsize=None)
def _f1p_cached(c: CurveData, pi_key, p):
    sp = make_prime_data(c.K, p, _pi_from_key(c, pi_key))
    iso = pi_isogeny(c, sp)
    P = iso.kernel_poly
    N = sp.norm
    V = RatFunc(P.derivative(), P) * Fraction(-1, N)
    F = RationalMap(RatFunc(Poly()), V, c)
    M = 20
    lhs = F.expansion(M)
    fam = wp_family(c, M + 4)
    pibar = sp.pibar
    rhs = fam.F1 - fam.F1.scale(sp.pi) * (1 / pibar if not isinstance(pibar, Fraction) else Fraction(1) / pibar)
    if not lhs.agrees_with(rhs.truncate(M), M):
        raise CrossCheckError("F1^(p) from the kernel polynomial disagrees with F1(z) - F1(pi z)/conj(pi)")
    return F


def f1p_rational(c: CurveData, sp: SplitPrimeData) -> RationalMap:
    """F1^(p) = F1(z) - F1(pi z)/conj(pi) = wp' P'(wp) / (-N P(wp)), cross-checked to order 20."""
    return _f1p_cached(c, _pi_key(sp.pi), sp.p)


# ---------------------------------------------------------------------------
# Torsion points
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TorsionPoint:
    x: object
    y: object
    curve: CurveData = field(repr=False)
    annihilator: object = None
    order: int = 1
    label: str = ""

    @property
    def xy(self):
        return (self.x, self.y)

    def describe(self) -> str:
        return f"({serialize_exact(self.x)},{serialize_exact(self.y)})"


def make_point(c: CurveData, x, y, label: str = "") -> TorsionPoint:
    P = (_demote(x), _demote(y))
    if not on_curve(c, P):
        raise FieldError("point is not on the curve")
    n = _z_order(c, P, 1000)
    ann = annihilator(c, P, n)
    return TorsionPoint(P[0], P[1], c, ann, n, label)


def _z_order(c, P, bound):
    Q = P
    for k in range(1, bound + 1):
        if Q is None:
            return k - 1 if k > 1 else 1
        if k == bound:
            break
        Q = curve_add(c, Q, P)
        if Q is None:
            return k + 1
    raise FieldError("point is not torsion within the search bound")


def _gaussian_candidates(n):
    out = []
    for a in range(-n, n + 1):
        for b in range(-n, n + 1):
            if (a, b) == (0, 0):
                continue
            N = a * a + b * b
            if (n * n) % N:
                continue
            # alpha | n  <=>  n * conj(alpha) / N is integral
            if (n * a) % N or (n * b) % N:
                continue
            out.append((N, a, b))
    return sorted(out)


def _eisenstein_candidates(n):
    out = []
    for a in range(-2 * n, 2 * n + 1):
        for b in range(-2 * n, 2 * n + 1):
            if (a, b) == (0, 0):
                continue
            N = a * a - a * b + b * b  # norm of a + b*zeta3
            if (n * n) % N:
                continue
            # conj(a + b zeta) = (a - b) - b zeta
            if (n * (a - b)) % N or (n * (-b)) % N:
                continue
            out.append((N, a, b))
    return sorted(out)


def _normalize_generator(c, a, b):
    """Canonical unit multiple: congruent to 1 mod 2(1+i) when possible (d = 1)."""
    K = c.K
    if c.d == 1:
        units = [(a, b), (-b, a), (-a, -b), (b, -a)]
        for x, y in units:
            # x + y i == 1 mod (2+2i): (x-1 + y i)/(2+2i) = ((x-1+y) + (y-(x-1)) i)/4
            if (x - 1 + y) % 4 == 0 and (y - x + 1) % 4 == 0:
                return K.element([x, y]).demote()
        for x, y in units:
            if x > 0 and y >= 0:
                return K.element([x, y]).demote()
    if c.d == 3:
        z = cm_unit(c)
        alpha = a + b * z
        cands = []
        u = K.one
        for _ in range(6):
            cands.append(alpha * u)
            u = u * (-z)
        def key(t):
            re_ = t.coords[0] - t.coords[1] * 0  # real part of c0 + c1 sqrt(-3) is c0
            return (-(t.coords[0]), -(t.coords[1]))
        return sorted(cands, key=key)[0].demote()
    return Fraction(a)


def annihilator(c: CurveData, P, n: int | None = None):
    """Generator of the O_K-annihilator of P (the Z-order when there is no CM action)."""
    if P is None:
        return Fraction(1)
    n = _z_order(c, P, 1000) if n is None else n
    if c.d == 1:
        for N, a, b in _gaussian_candidates(n):
            if cm_mul(c, c.K.element([a, b]), P) is None:
                return _normalize_generator(c, a, b)
    if c.d == 3:
        z = cm_unit(c)
        for N, a, b in _eisenstein_candidates(n):
            if cm_mul(c, a + b * z, P) is None:
                return _normalize_generator(c, a, b)
    return Fraction(n)


def _sort_key(P):
    x, y = P
    deg = max(field_of(x).absolute_degree, field_of(y).absolute_degree)
    ex, ey = embed_complex(x, 20), embed_complex(y, 20)
    import mpmath

    ex, ey = mpmath.mpc(ex), mpmath.mpc(ey)
    r = lambda t: round(float(t), 9)
    return (deg, -r(ex.real), -r(ex.imag), -r(ey.real), -r(ey.imag))


def torsion_points(c: CurveData, n: int):
    """All P with nP = O (O first, then a deterministic order), each with its annihilator."""
    if n < 1 or n > 12:
        raise ValueError("n must lie in 1..12")
    if n == 1:
        return [None]
    u, v = division_polynomial(c, n)
    if v.is_zero():
        xpoly = u * u
    else:
        xpoly = v * v * c.f_poly
    F = c.K
    xpoly = Poly([F.coerce(a) for a in xpoly.c]) if F is not QQ else xpoly
    while True:
        facs = factor_poly(xpoly, F)
        big = [g for g, _ in facs if g.deg > 1]
        if not big:
            break
        F, _ = extend_by_root(F, big[0])
    xs = [-g.c[0] for g, _ in facs]
    pts = []
    while True:
        pts = []
        extended = False
        for x0 in xs:
            t2 = c.rhs(x0)
            ys = factor_poly(Poly([-t2, 0, 1]), F)
            if len(ys) == 1 and ys[0][0].deg == 2:
                F, _ = extend_by_root(F, ys[0][0])
                extended = True
                break
            roots = sorted({_hashable_key(-g.c[0]): -g.c[0] for g, _ in ys if g.deg == 1}.values(),
                           key=lambda t: serialize_exact(t))
            if len(roots) == 1 or t2 == 0:
                pts.append((_demote(x0), _demote(roots[0] if roots else F.zero)))
            else:
                for y0 in roots:
                    pts.append((_demote(x0), _demote(y0)))
        if not extended:
            break
    pts.sort(key=_sort_key)
    out = [None]
    for k, P in enumerate(pts, 1):
        if not on_curve(c, P):
            raise CrossCheckError("torsion point not on the curve")
        if curve_mul(c, n, P) is not None:
            raise CrossCheckError("torsion point is not killed by n")
        m = _z_order(c, P, n + 1)
        out.append(TorsionPoint(P[0], P[1], c, annihilator(c, P, m), m, f"{n}tor:{k}"))
    return out


def _hashable_key(t):
    return serialize_exact(t)


def select_point(c: CurveData, selector: str) -> TorsionPoint | None:
    """Selectors: ``lattice``/``O``, ``<n>tor:<k>`` (1-based, nonzero points), ``point:x,y``."""
    selector = selector.strip()
    if selector in ("lattice", "O", "0"):
        return None
    m = re.fullmatch(r"(\d+)tor:(\d+)", selector)
    if m:
        n, k = int(m.group(1)), int(m.group(2))
        pts = torsion_points(c, n)
        if not 1 <= k < len(pts):
            raise ConfigError(f"selector {selector!r}: only {len(pts) - 1} nonzero points")
        return pts[k]
    m = re.fullmatch(r"point:([^,]+),(.+)", selector)
    if m:
        x = parse_k_element(m.group(1), c.K)
        y = parse_k_element(m.group(2), c.K)
        if not on_curve(c, (x, y)):
            raise ConfigError(f"selector {selector!r}: point is not on the curve")
        return make_point(c, x, y, selector)
    raise ConfigError(f"unknown point selector {selector!r}")


# ---------------------------------------------------------------------------
# Translation and algebraization
# ---------------------------------------------------------------------------


def translate_wp(c: CurveData, z0, M: int):
    """wp(z+z0) and wp'(z+z0) as power series known below z^M."""
    if z0 is None:
        raise ValueError("translation needs z0 != O")
    x0, y0 = _xy(z0)
    work = M + 8
    fam = wp_family(c, work)
    wp, dwp = fam.wp, fam.dwp
    lam = (dwp - y0) / (wp - x0)
    X = lam * lam / 4 - wp - x0
    X = X.truncate(M + 1)
    Y = X.derivative()
    if X.order < M + 1:
        raise ArithmeticError("translation lost more order than budgeted")
    return X.truncate(M), Y.truncate(M)


def algebraize(f: TruncSeries, c: CurveData) -> RationalMap:
    """Write an elliptic function's Laurent expansion as a polynomial in wp, wp'."""
    pole = -f.floor if f.floor < 0 else 0
    M = f.order
    if M < pole + 2:
        raise NotElliptic("series too short for pole descent")
    fam = wp_family(c, M + 3 * pole + 8)
    wp, dwp = fam.wp, fam.dwp
    u = {}
    v = {}
    rem = f
    for k in range(pole, 0, -1):
        a = rem.coeff(-k)
        if a == 0:
            continue
        if k == 1:
            raise NotElliptic("nonzero residue left by pole descent")
        if k % 2 == 0:
            e = k // 2
            u[e] = u.get(e, 0) + a
            rem = rem - (wp ** e) * a
        else:
            e = (k - 3) // 2
            coef = a / Fraction(-2)
            v[e] = v.get(e, 0) + coef
            rem = rem - (wp ** e) * dwp * coef if e else rem - dwp * coef
    const = rem.coeff(0)
    u[0] = u.get(0, 0) + const
    rest = rem - const
    if not rest.truncate(min(rest.order, M)).is_zero():
        raise NotElliptic("residual after pole descent is not constant")
    upoly = Poly([u.get(k, 0) for k in range(max(u) + 1)])
    vpoly = Poly([v.get(k, 0) for k in range(max(v) + 1)]) if v else Poly()
    return RationalMap.from_polys(upoly, vpoly, c)
