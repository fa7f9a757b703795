"""Dense univariate polynomials over any exact or p-adic scalar type."""
from __future__ import annotations

from fractions import Fraction


def _is_zero(c) -> bool:
    return c == 0


def _inv(a):
    if isinstance(a, int):
        return Fraction(1, a)
    return 1 / a


class Poly:
    """Polynomial stored as a coefficient list, lowest degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = list(coeffs)
        while c and _is_zero(c[-1]):
            c.pop()
        self.c = c

    @classmethod
    def x(cls, one=1):
        return cls([0 * one, one])

    @classmethod
    def const(cls, a):
        return cls([a])

    @property
    def deg(self) -> int:
        return len(self.c) - 1

    @property
    def lc(self):
        return self.c[-1]

    def is_zero(self) -> bool:
        return not self.c

    def __getitem__(self, k):
        return self.c[k] if 0 <= k < len(self.c) else 0

    def __len__(self):
        return len(self.c)

    def __iter__(self):
        return iter(self.c)

    def __repr__(self):
        return f"Poly({self.c!r})"

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        if len(self.c) != len(other.c):
            return False
        return all(a == b for a, b in zip(self.c, other.c))

    def __hash__(self):
        return hash(tuple(self.c))

    def __neg__(self):
        return Poly([-a for a in self.c])

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(len(self.c), len(other.c))
        out = []
        for k in range(n):
            if k < len(self.c) and k < len(other.c):
                out.append(self.c[k] + other.c[k])
            elif k < len(self.c):
                out.append(self.c[k])
            else:
                out.append(other.c[k])
        return Poly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self + (-other)

    def __rsub__(self, other):
        return Poly([other]) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly([a * other for a in self.c])
        if not self.c or not other.c:
            return Poly()
        out = [None] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.c):
                t = a * b
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        return Poly([0 if v is None else v for v in out])

    def __rmul__(self, other):
        return Poly([other * a for a in self.c])

    def __pow__(self, n: int):
        result = Poly([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        """Horner evaluation; x may be any ring element (scalar, series, ...)."""
        if not self.c:
            return 0 * x
        acc = self.c[-1] + 0 * x
        for a in reversed(self.c[:-1]):
            acc = acc * x + a
        return acc

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        dq = len(r) - len(other.c)
        if dq < 0:
            return Poly(), Poly(r)
        inv = _inv(other.lc)
        q = [0] * (dq + 1)
        for k in range(dq, -1, -1):
            coef = r[k + other.deg]
            if _is_zero(coef):
                continue
            t = coef * inv
            q[k] = t
            for j, b in enumerate(other.c):
                r[k + j] = r[k + j] - t * b
        return Poly(q), Poly(r[: other.deg])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        inv = _inv(self.lc)
        return Poly([a * inv for a in self.c])

    def derivative(self) -> "Poly":
        return Poly([k * a for k, a in enumerate(self.c)][1:])

    def compose(self, other: "Poly") -> "Poly":
        acc = Poly()
        for a in reversed(self.c):
            acc = acc * other + Poly([a])
        return acc

    def scale_var(self, t) -> "Poly":
        """Return p(t*x)."""
        out, pw = [], 1
        for a in self.c:
            out.append(a * pw)
            pw = pw * t
        return Poly(out)

    def map(self, fn) -> "Poly":
        return Poly([fn(a) for a in self.c])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero polynomial if both vanish)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_xgcd(a: Poly, b: Poly):
    """Return (g, s, t) with s*a + t*b = g monic."""
    r0, r1 = a, b
    s0, s1 = Poly([1]), Poly()
    t0, t1 = Poly(), Poly([1])
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    inv = _inv(r0.lc)
    return r0 * inv, s0 * inv, t0 * inv


def squarefree_parts(f: Poly):
    """Yun's algorithm: list of (g_i, i) with f = lc * prod g_i^i, g_i squarefree, monic."""
    f = f.monic()
    out = []
    if f.deg < 1:
        return out
    fp = f.derivative()
    a = poly_gcd(f, fp)
    b = f // a
    c = fp // a
    d = c - b.derivative()
    i = 1
    while b.deg >= 1:
        g = poly_gcd(b, d)
        if g.deg >= 1:
            out.append((g, i))
        b = b // g
        c = d // g
        d = c - b.derivative()
        i += 1
    return out


def interpolate(points, values) -> Poly:
    """Lagrange interpolation (Newton divided differences) through (points, values)."""
    n = len(points)
    points = [Fraction(p) if isinstance(p, int) else p for p in points]
    coef = list(values)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (points[i] - points[i - j])
    acc = Poly([coef[-1]])
    for i in range(n - 2, -1, -1):
        acc = acc * Poly([-points[i], 1]) + Poly([coef[i]])
    return acc
