"""Exact scalars over Q, quadratic fields and small towers, plus p-adic scalars.

Exact elements are ``fractions.Fraction`` for Q and :class:`AlgebraicNumber`
for every proper extension.  Each :class:`NumberField` is a simple extension
``base[x]/(m(x))`` of a smaller field, so towers nest.  The absolute degree
over Q is capped at 8.

p-adic elements (:class:`PadicScalar`) live in Q_p or in the unramified
quadratic extension presented by ``x^2 + c1 x + c0``.  Precision is tracked
pessimistically per scalar.
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import (
    FieldError,
    NoRootError,
    PrecisionError,
    ReducibleModulus,
    TowerTooDeep,
)
from .poly import Poly, interpolate, poly_gcd, poly_xgcd, squarefree_parts

MAX_TOWER_DEGREE = 8
EXACT_PREC = 10 ** 9  # absolute precision of an exact p-adic zero


# ---------------------------------------------------------------------------
# Exact fields
# ---------------------------------------------------------------------------


class RationalField:
    """The field Q; its elements are plain ``Fraction`` objects."""

    base = None
    degree = 1
    absolute_degree = 1
    key = ("QQ",)
    name = "QQ"

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        raise FieldError(f"{x!r} is not a rational number")

    def contains(self, x) -> bool:
        return isinstance(x, (int, Fraction))

    def chain(self):
        return [self]

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def __repr__(self):
        return "QQ"

    def descriptor(self) -> str:
        return "QQ"


QQ = RationalField()


def field_of(x):
    """Smallest field object of the tower that holds ``x``."""
    if isinstance(x, AlgebraicNumber):
        return x.field
    if isinstance(x, (int, Fraction)):
        return QQ
    raise FieldError(f"not an exact scalar: {x!r}")


class NumberField:
    """Simple extension ``base(theta)`` with theta a root of a monic modulus.

    ``modulus`` lists the coefficients m_0, ..., m_{n-1}, 1 over the base.
    ``root_index`` selects the complex root of the modulus (in a fixed
    ordering) that defines the embedding into C.
    """

    _cache: dict = {}

    def __new__(cls, base, modulus, root_index=0, name=None, check=True):
        base = QQ if base is None else base
        mod = tuple(base.coerce(c) for c in modulus)
        key = (base.key, tuple(_hashable(c) for c in mod), root_index)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.base = base
        self.modulus = mod
        self.degree = len(mod) - 1
        if self.degree < 2:
            raise FieldError("an extension needs a modulus of degree at least 2")
        if mod[-1] != 1:
            raise FieldError("modulus must be monic")
        self.absolute_degree = self.degree * base.absolute_degree
        if self.absolute_degree > MAX_TOWER_DEGREE:
            raise TowerTooDeep(f"absolute degree {self.absolute_degree} exceeds {MAX_TOWER_DEGREE}")
        self.root_index = root_index
        self.key = key
        self.name = name or f"t{len(cls._cache)}"
        self._root_cache = {}
        self._padic_roots = {}
        if check:
            _check_irreducible(Poly(list(mod)), base)
        # reduction table: x^(n+k) in the power basis, k = 0..n-2
        n = self.degree
        red = []
        cur = [-c for c in mod[:-1]]
        red.append(cur)
        for _ in range(n - 2):
            lead = cur[-1]
            nxt = [base.zero] + cur[:-1]
            nxt = [a - lead * m for a, m in zip(nxt, mod[:-1])]
            red.append(nxt)
            cur = nxt
        self._red = red
        cls._cache[key] = self
        return self

    def __reduce__(self):
        return (NumberField, (self.base, self.modulus, self.root_index, self.name, False))

    def __repr__(self):
        return f"NumberField({self.descriptor()})"

    def descriptor(self) -> str:
        terms = ",".join(serialize_exact(c) for c in self.modulus)
        return f"{self.base.descriptor()}[{self.name}:{terms}#{self.root_index}]"

    def chain(self):
        return [self] + self.base.chain()

    def contains(self, x) -> bool:
        if isinstance(x, (int, Fraction)):
            return True
        return isinstance(x, AlgebraicNumber) and x.field in self.chain()

    @property
    def zero(self):
        return AlgebraicNumber(self, (self.base.zero,) * self.degree)

    @property
    def one(self):
        return AlgebraicNumber(self, (self.base.one,) + (self.base.zero,) * (self.degree - 1))

    def gen(self):
        c = [self.base.zero] * self.degree
        c[1] = self.base.one
        return AlgebraicNumber(self, tuple(c))

    def coerce(self, x):
        if isinstance(x, AlgebraicNumber) and x.field is self:
            return x
        try:
            b = self.base.coerce(x)
        except FieldError:
            raise FieldError(f"{x!r} does not lie in {self!r}") from None
        return AlgebraicNumber(self, (b,) + (self.base.zero,) * (self.degree - 1))

    def element(self, coords):
        coords = tuple(self.base.coerce(c) for c in coords)
        coords = coords + (self.base.zero,) * (self.degree - len(coords))
        return AlgebraicNumber(self, coords)

    # --- complex embedding -------------------------------------------------
    def complex_gen(self, prec: int):
        """Image of the generator in C with about ``prec`` correct digits."""
        hit = self._root_cache.get(prec)
        if hit is not None:
            return hit
        with mpmath.workdps(prec + 20):
            coeffs = [embed_complex(c, prec + 20) for c in reversed(self.modulus)]
            roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * prec + 60)
            roots = sorted(roots, key=_root_sort_key)
            r = mpmath.mpc(roots[self.root_index])
        self._root_cache[prec] = r
        return r


def _root_sort_key(z):
    z = mpmath.mpc(z)
    return (-round(float(z.real), 10), -round(float(z.imag), 10))


def _hashable(c):
    if isinstance(c, AlgebraicNumber):
        return (c.field.key, tuple(_hashable(a) for a in c.coords))
    return c


class AlgebraicNumber:
    """Element of a :class:`NumberField` in the power basis over its base."""

    __slots__ = ("field", "coords")

    def __init__(self, field: NumberField, coords):
        self.field = field
        self.coords = tuple(coords)

    # --- coercion ------------------------------------------------------------
    def _unify(self, other):
        if isinstance(other, (int, Fraction)):
            return self.field, self.coords, self.field.coerce(other).coords
        if isinstance(other, AlgebraicNumber):
            if other.field is self.field:
                return self.field, self.coords, other.coords
            if other.field in self.field.chain():
                return self.field, self.coords, self.field.coerce(other).coords
            if self.field in other.field.chain():
                return other.field, other.field.coerce(self).coords, other.coords
            raise FieldError(f"no common field for {self.field!r} and {other.field!r}")
        return None

    # --- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        u = self._unify(other)
        if u is None:
            return NotImplemented
        F, a, b = u
        return AlgebraicNumber(F, tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicNumber(self.field, tuple(-x for x in self.coords))

    def __sub__(self, other):
        u = self._unify(other)
        if u is None:
            return NotImplemented
        F, a, b = u
        return AlgebraicNumber(F, tuple(x - y for x, y in zip(a, b)))

    def __rsub__(self, other):
        u = self._unify(other)
        if u is None:
            return NotImplemented
        F, a, b = u
        return AlgebraicNumber(F, tuple(y - x for x, y in zip(a, b)))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgebraicNumber(self.field, tuple(x * other for x in self.coords))
        u = self._unify(other)
        if u is None:
            return NotImplemented
        F, a, b = u
        return AlgebraicNumber(F, _mul_coords(F, a, b))

    __rmul__ = __mul__

    def inverse(self):
        F = self.field
        if all(c == 0 for c in self.coords):
            raise ZeroDivisionError("inverse of zero")
        if F.degree == 2:
            a, b = self.coords
            m0, m1 = F.modulus[0], F.modulus[1]
            nrm = a * a - m1 * a * b + m0 * b * b
            inv = _base_inv(nrm)
            return AlgebraicNumber(F, ((a - m1 * b) * inv, -b * inv))
        g, s, _ = poly_xgcd(Poly(list(self.coords)), Poly(list(F.modulus)))
        if g.deg != 0:
            raise ReducibleModulus("non-invertible element: modulus is reducible")
        c = list(s.c) + [F.base.zero] * (F.degree - len(s.c))
        return AlgebraicNumber(F, tuple(c[: F.degree]))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(1, 1) / other
            return AlgebraicNumber(self.field, tuple(x * q for x in self.coords))
        if isinstance(other, AlgebraicNumber):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            u = self._unify(other)
        except FieldError:
            return False
        if u is None:
            return NotImplemented
        return u[1] == u[2]

    def __hash__(self):
        if all(c == 0 for c in self.coords[1:]):
            return hash(self.coords[0])
        return hash((self.field.key, self.coords))

    def __repr__(self):
        return f"AlgebraicNumber({serialize_exact(self)} in {self.field.name})"

    def __str__(self):
        return serialize_exact(self)

    # --- structure -----------------------------------------------------------
    def conjugate_quadratic(self):
        """Galois conjugate over the base of a quadratic field."""
        F = self.field
        if F.degree != 2:
            raise FieldError("conjugation defined here only for quadratic fields")
        a, b = self.coords
        return AlgebraicNumber(F, (a - F.modulus[1] * b, -b))

    def norm(self):
        """Relative norm to the base field."""
        F = self.field
        if F.degree == 2:
            a, b = self.coords
            return a * a - F.modulus[1] * a * b + F.modulus[0] * b * b
        return _det([self._mult_column(j) for j in range(F.degree)], F.base)

    def _mult_column(self, j):
        F = self.field
        e = [F.base.zero] * F.degree
        e[j] = F.base.one
        return list(_mul_coords(F, self.coords, tuple(e)))

    def demote(self):
        """Rewrite in the smallest field of the chain that contains the value."""
        x = self
        while isinstance(x, AlgebraicNumber) and all(c == 0 for c in x.coords[1:]):
            x = x.coords[0]
        return x


def _base_inv(a):
    if isinstance(a, int):
        return Fraction(1, a)
    return 1 / a


def _mul_coords(F, a, b):
    n = F.degree
    zero = F.base.zero
    prod = [zero] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj == 0:
                continue
            prod[i + j] = prod[i + j] + ai * bj
    out = prod[:n]
    for k in range(n, 2 * n - 1):
        c = prod[k]
        if c == 0:
            continue
        for j, r in enumerate(F._red[k - n]):
            out[j] = out[j] + c * r
    return tuple(out)


def _det(cols, base):
    n = len(cols)
    m = [[cols[j][i] for j in range(n)] for i in range(n)]
    det = base.one
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return base.zero
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c]
        inv = _base_inv(m[c][c])
        for r in range(c + 1, n):
            f = m[r][c] * inv
            if f == 0:
                continue
            for k in range(c, n):
                m[r][k] = m[r][k] - f * m[c][k]
    return det


@lru_cache(maxsize=None)
def quadratic_field(d: int) -> NumberField:
    """Q(sqrt(-d)) with sqrt(-d) embedded as i*sqrt(d)."""
    if d <= 0:
        raise FieldError("d must be a positive integer")
    return NumberField(QQ, (d, 0, 1), 0, name=f"sqrt(-{d})")


# ---------------------------------------------------------------------------
# Factorization over the tower (Trager's norm method on top of Q)
# ---------------------------------------------------------------------------


def _factor_rational(f: Poly):
    import sympy

    X = sympy.Symbol("x")
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(f.c)], X)
    _, facs = sympy.factor_list(sp)
    out = []
    for g, mult in facs:
        coeffs = [Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in g.all_coeffs()]
        out.append((Poly(list(reversed(coeffs))).monic(), mult))
    out.sort(key=lambda t: (t[0].deg, [str(c) for c in t[0].c]))
    return out


def _norm_poly(g: Poly, L: NumberField) -> Poly:
    deg = g.deg * L.degree
    pts = [Fraction(k) for k in range(deg + 1)]
    vals = []
    for a in pts:
        vals.append(L.coerce(g(a)).norm())
    return interpolate(pts, vals)


def factor_poly(f: Poly, field=QQ):
    """Factor ``f`` over ``field`` into monic irreducibles with multiplicities."""
    if field is QQ:
        f = Poly([QQ.coerce(c) for c in f.c])
        return _factor_rational(f)
    f = Poly([field.coerce(c) for c in f.c])
    out = []
    for g, mult in squarefree_parts(f):
        for h in _factor_squarefree(g, field):
            out.append((h, mult))
    return out


def _factor_squarefree(g: Poly, L: NumberField):
    if g.deg <= 1:
        return [g.monic()] if g.deg == 1 else []
    theta = L.gen()
    for s in itertools.chain([0], *([k, -k] for k in range(1, 30))):
        gs = g.compose(Poly([-s * theta, L.one])) if s else g
        N = _norm_poly(gs, L)
        if poly_gcd(N, N.derivative()).deg == 0:
            break
    else:  # pragma: no cover - Trager's shift always succeeds in characteristic 0
        raise FieldError("no squarefree norm found")
    out = []
    for Ni, _ in factor_poly(N, L.base):
        NiL = Poly([L.coerce(c) for c in Ni.c])
        h = poly_gcd(gs, NiL)
        if h.deg >= 1:
            if s:
                h = h.compose(Poly([s * theta, L.one]))
            out.append(h.monic())
    return out


def _check_irreducible(f: Poly, base):
    n = f.deg
    if n > 4:
        raise FieldError("moduli of degree above 4 are rejected")
    facs = factor_poly(f, base)
    if len(facs) != 1 or facs[0][1] != 1 or facs[0][0].deg != n:
        raise ReducibleModulus(f"modulus {f!r} factors over the base")


def roots_in_field(f: Poly, field):
    """All roots of ``f`` lying in ``field`` (with multiplicity ignored)."""
    out = []
    for g, _ in factor_poly(f, field):
        if g.deg == 1:
            out.append(-g.c[0])
    return out


def extend_by_root(field, f: Poly, name=None):
    """Adjoin a root of the irreducible polynomial ``f`` over ``field``."""
    L = NumberField(field, tuple(field.coerce(c) for c in f.monic().c), 0, name=name)
    return L, L.gen()


def common_field(*xs):
    """Largest field in the chain spanned by the operands' fields."""
    best = QQ
    for x in xs:
        F = field_of(x)
        if F is best or F in best.chain():
            continue
        if best in F.chain():
            best = F
            continue
        raise FieldError(f"no common field for {best!r} and {F!r}")
    return best


# ---------------------------------------------------------------------------
# Complex embedding
# ---------------------------------------------------------------------------


def embed_complex(x, prec: int = 30):
    """Image of an exact scalar in C with |error| < 10^-prec."""
    with mpmath.workdps(prec + 10):
        if isinstance(x, int):
            return mpmath.mpf(x)
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        if isinstance(x, AlgebraicNumber):
            g = x.field.complex_gen(prec + 10)
            acc = mpmath.mpc(0)
            for c in reversed(x.coords):
                acc = acc * g + embed_complex(c, prec + 10)
            return +acc
    raise FieldError(f"cannot embed {x!r}")


# ---------------------------------------------------------------------------
# Exact serialization
# ---------------------------------------------------------------------------


def serialize_exact(x) -> str:
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}" if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, AlgebraicNumber):
        return "(" + ",".join(serialize_exact(c) for c in x.coords) + ")"
    raise FieldError(f"cannot serialize {x!r}")


def parse_exact(s: str, field=QQ):
    s = s.strip()
    if not s.startswith("("):
        return Fraction(s)
    if field is QQ:
        raise FieldError("tuple literal needs an extension field")
    inner = s[1:-1]
    parts, depth, cur = [], 0, ""
    for ch in inner:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    parts.append(cur)
    return field.element([parse_exact(p, field.base) for p in parts])


# ---------------------------------------------------------------------------
# p-adic fields
# ---------------------------------------------------------------------------


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicField:
    """Q_p (f = 1) or its unramified quadratic extension Q_p[x]/(x^2 + c1 x + c0)."""

    _cache: dict = {}

    def __new__(cls, p: int, f: int = 1, modulus=None):
        key = (p, f, tuple(modulus) if modulus else None)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.p, self.f = p, f
        if f == 1:
            self.c0 = self.c1 = 0
        elif f == 2:
            self.c0, self.c1 = int(modulus[0]), int(modulus[1])
            if any((t * t + self.c1 * t + self.c0) % p == 0 for t in range(p)):
                raise FieldError("modulus of the unramified extension must be irreducible mod p")
        else:
            raise FieldError("only unramified degree 1 or 2 is supported")
        self.key = key
        cls._cache[key] = self
        return self

    def __reduce__(self):
        return (PadicField, (self.p, self.f, (self.c0, self.c1) if self.f == 2 else None))

    def __repr__(self):
        if self.f == 1:
            return f"Q_{self.p}"
        return f"Q_{self.p}[x]/(x^2+{self.c1}x+{self.c0})"

    def zero(self, absprec: int) -> "PadicScalar":
        return PadicScalar(self, absprec, (0,) * self.f, 0)

    def from_rational(self, q, absprec: int) -> "PadicScalar":
        q = Fraction(q)
        if q == 0:
            return self.zero(absprec)
        p = self.p
        v = _vp(q.numerator, p) - _vp(q.denominator, p)
        r = absprec - v
        if r <= 0:
            return self.zero(absprec)
        mod = p ** r
        num = q.numerator // p ** max(v, 0)
        den = q.denominator // p ** max(-v, 0)
        u = num * pow(den, -1, mod) % mod
        return PadicScalar(self, v, (u,) + (0,) * (self.f - 1), r)

    def from_coords(self, coords, absprec: int) -> "PadicScalar":
        """Element a0 + a1*x from rational coordinates."""
        acc = self.from_rational(coords[0], absprec)
        if self.f == 2 and len(coords) > 1 and coords[1] != 0:
            c1 = Fraction(coords[1])
            e = max(0, _vp(c1.denominator, self.p))
            acc = acc + self.from_rational(c1, absprec + e) * self.gen(absprec + e)
        return acc.with_absprec(absprec)

    def gen(self, absprec: int) -> "PadicScalar":
        if self.f == 1:
            raise FieldError("Q_p has no extension generator")
        return PadicScalar(self, 0, (0, 1), absprec)


class PadicScalar:
    """p^v * u with u a unit known modulo p^r; zero at precision has r = 0."""

    __slots__ = ("F", "v", "u", "r")

    def __init__(self, F: PadicField, v: int, u, r: int):
        self.F = F
        self.v = v
        self.u = tuple(u)
        self.r = r

    # --- construction helpers ------------------------------------------------
    @staticmethod
    def _make(F, v, u, absprec):
        """Normalize integer coordinates ``u`` at valuation ``v`` up to ``absprec``."""
        p = F.p
        r = absprec - v
        if r <= 0:
            return PadicScalar(F, absprec, (0,) * F.f, 0)
        mod = p ** r
        u = [a % mod for a in u]
        if all(a == 0 for a in u):
            return PadicScalar(F, absprec, (0,) * F.f, 0)
        shift = min(_vp(a, p) for a in u if a)
        if shift:
            pw = p ** shift
            u = [a // pw for a in u]
            v += shift
            r -= shift
            mod = p ** r
            u = [a % mod for a in u]
        return PadicScalar(F, v, tuple(u), r)

    @property
    def absprec(self) -> int:
        return self.v + self.r

    @property
    def relprec(self) -> int:
        return self.r

    def valuation(self) -> int:
        return self.v

    def is_zero(self) -> bool:
        return self.r == 0

    def with_absprec(self, n: int) -> "PadicScalar":
        """Reduce the precision to at most ``n`` (never increases it)."""
        if n >= self.absprec:
            return self
        return PadicScalar._make(self.F, self.v, self.u, n)

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.F is not self.F:
                raise FieldError("p-adic operands from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return None
        return NotImplemented

    def _exact_mul(self, q):
        q = Fraction(q)
        F = self.F
        if q == 0:
            return PadicScalar(F, EXACT_PREC, (0,) * F.f, 0)
        p = F.p
        vq = _vp(q.numerator, p) - _vp(q.denominator, p)
        if self.r == 0:
            return PadicScalar(F, self.v + vq, (0,) * F.f, 0)
        mod = p ** self.r
        num = q.numerator // p ** max(vq, 0)
        den = q.denominator // p ** max(-vq, 0)
        t = num * pow(den, -1, mod) % mod
        return PadicScalar(F, self.v + vq, tuple(a * t % mod for a in self.u), self.r)

    # --- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            o = self.F.from_rational(other, self.absprec)
        ap = min(self.absprec, o.absprec)
        a_nz, b_nz = self.r > 0 and self.v < ap, o.r > 0 and o.v < ap
        if not a_nz and not b_nz:
            return self.F.zero(ap)
        if not b_nz:
            return self.with_absprec(ap)
        if not a_nz:
            return o.with_absprec(ap)
        p = self.F.p
        vmin = min(self.v, o.v)
        sa, sb = p ** (self.v - vmin), p ** (o.v - vmin)
        u = [x * sa + y * sb for x, y in zip(self.u, o.u)]
        return PadicScalar._make(self.F, vmin, u, ap)

    __radd__ = __add__

    def __neg__(self):
        if self.r == 0:
            return self
        mod = self.F.p ** self.r
        return PadicScalar(self.F, self.v, tuple((-a) % mod for a in self.u), self.r)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self + (-Fraction(other))
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self._exact_mul(other)
        F = self.F
        if self.r == 0 or o.r == 0:
            ap = min(self.v + o.absprec, o.v + self.absprec)
            return F.zero(ap)
        r = min(self.r, o.r)
        mod = F.p ** r
        if F.f == 1:
            return PadicScalar(F, self.v + o.v, ((self.u[0] * o.u[0]) % mod,), r)
        a0, a1 = self.u
        b0, b1 = o.u
        t = a1 * b1
        c0 = (a0 * b0 - F.c0 * t) % mod
        c1 = (a0 * b1 + a1 * b0 - F.c1 * t) % mod
        return PadicScalar(F, self.v + o.v, (c0, c1), r)

    __rmul__ = __mul__

    def inverse(self):
        if self.r == 0:
            raise PrecisionError("inverse of a p-adic zero (no significant digits)")
        F = self.F
        mod = F.p ** self.r
        if F.f == 1:
            return PadicScalar(F, -self.v, (pow(self.u[0], -1, mod),), self.r)
        a0, a1 = self.u
        b0, b1 = a0 - F.c1 * a1, -a1
        nrm = (a0 * a0 - F.c1 * a0 * a1 + F.c0 * a1 * a1) % mod
        ni = pow(nrm, -1, mod)
        return PadicScalar(F, -self.v, ((b0 * ni) % mod, (b1 * ni) % mod), self.r)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self._exact_mul(1 / Fraction(other))
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            base = base * base
            n >>= 1
        if result is None:
            return self.F.from_rational(1, max(self.r, self.absprec, 1))
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = self - other
        return d.r == 0

    __hash__ = None

    def __repr__(self):
        return f"PadicScalar({serialize_padic(self)})"

    # --- inspection -------------------------------------------------------------
    def lift(self):
        """Integer (or Fraction) coordinates representing the value mod p^absprec."""
        p = self.F.p
        if self.r == 0:
            return (0,) * self.F.f
        if self.v >= 0:
            return tuple(a * p ** self.v for a in self.u)
        return tuple(Fraction(a, p ** (-self.v)) for a in self.u)

    def residue(self):
        """Reduction modulo p (requires v >= 0 and absprec >= 1)."""
        if self.absprec < 1:
            raise PrecisionError("no residue information")
        if self.v > 0 or self.r == 0:
            return (0,) * self.F.f
        if self.v < 0:
            raise PrecisionError("element is not integral")
        return tuple(a % self.F.p for a in self.u)

    def digits(self):
        """Base-p digits of each unit coordinate, least significant first."""
        p = self.F.p
        out = []
        for a in self.u:
            ds = []
            for _ in range(self.r):
                ds.append(a % p)
                a //= p
            out.append(ds)
        return out


def serialize_padic(x: PadicScalar) -> str:
    if x.r == 0:
        return f"0 v={x.v} N={x.absprec}"
    ds = x.digits()
    if x.F.f == 1:
        body = ".".join(str(d) for d in ds[0])
    else:
        body = "[" + "|".join(".".join(str(d) for d in c) for c in ds) + "]"
    return f"{body} v={x.v} N={x.absprec}"


# ---------------------------------------------------------------------------
# Precision ledger
# ---------------------------------------------------------------------------


class PrecisionLedger:
    """Worst absolute precision observed per pipeline stage."""

    def __init__(self):
        self.entries: dict = {}

    def record(self, stage: str, requested: int, achieved: int):
        prev = self.entries.get(stage)
        if prev is None or achieved < prev[1]:
            self.entries[stage] = (requested, achieved)

    def as_dict(self):
        return {k: {"requested": a, "achieved": b, "loss": a - b} for k, (a, b) in sorted(self.entries.items())}


_LEDGER = contextvars.ContextVar("precision_ledger", default=None)


@contextlib.contextmanager
def precision_ledger():
    led = PrecisionLedger()
    token = _LEDGER.set(led)
    try:
        yield led
    finally:
        _LEDGER.reset(token)


def ledger_record(stage: str, requested: int, achieved: int):
    led = _LEDGER.get()
    if led is not None:
        led.record(stage, requested, achieved)


# ---------------------------------------------------------------------------
# Prime data and p-adic embedding
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SplitPrimeData:
    """A prime p of the quadratic field K with generator pi and the chosen embedding."""

    p: int
    pi: object
    K: NumberField
    split: bool
    field: PadicField
    root_residue: int

    @property
    def norm(self) -> int:
        """N(frak p): p when split, p^2 when inert."""
        return self.p if self.split else self.p * self.p

    @property
    def pibar(self):
        pi = self.pi
        if isinstance(pi, AlgebraicNumber):
            return pi.conjugate_quadratic()
        return pi

    def with_pi(self, pi) -> "SplitPrimeData":
        return make_prime_data(self.K, self.p, pi)

    def describe(self) -> str:
        return f"p={self.p} pi={serialize_exact(self.pi)} {'split' if self.split else 'inert'}"

    @lru_cache(maxsize=64)
    def iota(self, N: int) -> PadicScalar:
        """Image of the generator of K in the p-adic field at absolute precision N."""
        F = self.field
        if not self.split:
            return F.gen(N)
        m0, m1 = (int(c) for c in self.K.modulus[:2])
        mod = self.p ** N
        u = self.root_residue
        for _ in range(N.bit_length() + 2):
            fu = u * u + m1 * u + m0
            du = 2 * u + m1
            u = (u - fu * pow(du, -1, mod)) % mod
        return PadicScalar._make(F, 0, (u,), N)


def make_prime_data(K: NumberField, p: int, pi) -> SplitPrimeData:
    """Validate (p, pi) for the quadratic field K and pin the embedding."""
    if K.degree != 2 or K.base is not QQ:
        raise FieldError("prime data needs an imaginary quadratic base field")
    pi = K.coerce(pi) if not isinstance(pi, (int, Fraction)) else Fraction(pi)
    m0, m1 = K.modulus[0], K.modulus[1]
    if m0.denominator != 1 or m1.denominator != 1:
        raise FieldError("modulus of K must be integral")
    m0, m1 = int(m0), int(m1)
    disc = m1 * m1 - 4 * m0
    if disc % p == 0 or p == 2:
        raise FieldError("ramified primes and p = 2 are not supported")
    roots = [t for t in range(p) if (t * t + m1 * t + m0) % p == 0]
    nrm = pi.norm() if isinstance(pi, AlgebraicNumber) else Fraction(pi) ** 2
    if roots:
        if nrm != p:
            raise FieldError(f"split prime: N(pi) = {nrm} but p = {p}")
        a, b = (pi.coords if isinstance(pi, AlgebraicNumber) else (Fraction(pi), Fraction(0)))
        chosen = [t for t in roots if (a.numerator * pow(a.denominator, -1, p) + b.numerator * pow(b.denominator, -1, p) * t) % p == 0]
        if len(chosen) != 1:
            raise FieldError("could not pin the embedding: pi has no unique zero mod p")
        return SplitPrimeData(p, pi, K, True, PadicField(p, 1), chosen[0])
    if nrm != p * p:
        raise FieldError(f"inert prime: N(pi) = {nrm} but p^2 = {p * p}")
    return SplitPrimeData(p, pi, K, False, PadicField(p, 2, (m0, m1)), -1)


def embed_padic(x, sp: SplitPrimeData, N: int) -> PadicScalar:
    """Image of an exact scalar in the p-adic field of ``sp`` at absolute precision N."""
    if N < 1:
        raise PrecisionError("precision must be at least 1")
    guard = 4
    for _ in range(6):
        y = _embed(x, sp, N + guard)
        if y.absprec >= N:
            return y.with_absprec(N)
        guard *= 2
    raise PrecisionError(f"could not reach precision {N} for {x!r}")


def _min_valuation(x, p):
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if x == 0:
            return 0
        return _vp(x.numerator, p) - _vp(x.denominator, p)
    return min(_min_valuation(c, p) for c in x.coords)


def _embed(x, sp: SplitPrimeData, N: int) -> PadicScalar:
    F = sp.field
    if isinstance(x, (int, Fraction)):
        return F.from_rational(x, N)
    if not isinstance(x, AlgebraicNumber):
        raise FieldError(f"cannot embed {x!r}")
    L = x.field
    if L is sp.K:
        a, b = x.coords
        extra = max(0, -_min_valuation(x, sp.p))
        return F.from_rational(a, N) + F.from_rational(b, N + extra) * sp.iota(N + extra)
    if sp.K not in L.chain():
        raise FieldError(f"{L!r} is not an extension of {sp.K!r}")
    extra = max(0, -_min_valuation(x, sp.p)) + 2
    g = padic_root(L, sp, N + extra)
    acc = None
    for c in reversed(x.coords):
        t = _embed(c, sp, N + extra)
        acc = t if acc is None else acc * g + t
    return acc


def padic_root(L: NumberField, sp: SplitPrimeData, N: int) -> PadicScalar:
    """Hensel-lifted image of the generator of the tower field L."""
    key = (sp.p, serialize_exact(sp.pi), N)
    hit = L._padic_roots.get(key)
    if hit is not None:
        return hit
    F = sp.field
    work = N + 4
    coeffs = [_embed(c, sp, work) for c in L.modulus]
    for c in coeffs:
        if c.r and c.v < 0:
            raise NoRootError("non-integral minimal polynomial; rescale the generator")
    p = sp.p

    def ev(poly, t):
        acc = None
        for c in reversed(poly):
            acc = c if acc is None else acc * t + c
        return acc

    deriv = [c * k for k, c in enumerate(coeffs)][1:]
    residues = itertools.product(range(p), repeat=F.f)
    root = None
    for res in residues:
        t = PadicScalar._make(F, 0, res, work)
        if t.r == 0:
            t = F.zero(work)
        val = ev(coeffs, t)
        if val.v >= 1 or val.r == 0:
            dv = ev(deriv, t)
            if dv.r and dv.v == 0:
                root = t
                break
    if root is None:
        raise NoRootError(f"minimal polynomial of {L.name} has no simple root mod {p}")
    for _ in range(work.bit_length() + 3):
        root = root - ev(coeffs, root) / ev(deriv, root)
        root = root.with_absprec(work)
    if root.r == 0:
        root = F.zero(N)
    root = root.with_absprec(N)
    L._padic_roots[key] = root
    return root
