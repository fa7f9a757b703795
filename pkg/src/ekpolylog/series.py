"""Truncated Laurent series in one and two variables over exact or p-adic scalars.

A series knows its truncation order M: coefficients of exponent >= M are
unknown, and asking for one raises :class:`TruncationError`.  Every operation
derives the order of its result from the orders and valuations of its inputs.
"""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import CompositionError, DomainError, ResidueError, TruncationError
from .exactnum import PadicScalar, serialize_exact, serialize_padic

INF_ORDER = 10 ** 6


def is_exact_zero(c) -> bool:
    if isinstance(c, PadicScalar):
        return False
    return c == 0


def is_zeroish(c) -> bool:
    """Exact zero, or a p-adic zero without significant digits."""
    if isinstance(c, PadicScalar):
        return c.r == 0
    return c == 0


def _inv(c):
    if isinstance(c, int):
        return Fraction(1, c)
    return 1 / c


def serialize_scalar(c) -> str:
    if isinstance(c, PadicScalar):
        return serialize_padic(c)
    return serialize_exact(c)


class TruncSeries:
    """sum_k c_k var^k + O(var^order) with finitely many negative exponents."""

    __slots__ = ("c", "order", "var")

    def __init__(self, coeffs=None, order: int = INF_ORDER, var: str = "z"):
        self.order = order
        self.var = var
        self.c = {}
        if coeffs:
            for k, a in coeffs.items():
                if k < order and not is_exact_zero(a):
                    self.c[k] = a

    # --- constructors --------------------------------------------------------
    @classmethod
    def const(cls, a, order=INF_ORDER, var="z"):
        return cls({0: a}, order, var)

    @classmethod
    def monomial(cls, k, a=1, order=INF_ORDER, var="z"):
        return cls({k: a}, order, var)

    @classmethod
    def from_list(cls, coeffs, order=None, var="z", start=0):
        order = start + len(coeffs) if order is None else order
        return cls({start + i: a for i, a in enumerate(coeffs)}, order, var)

    def _new(self, coeffs, order):
        return TruncSeries(coeffs, order, self.var)

    # --- access ----------------------------------------------------------------
    def coeff(self, k: int):
        if k >= self.order:
            raise TruncationError(f"coefficient {k} requested, series known below {self.order}")
        return self.c.get(k, 0)

    __getitem__ = coeff

    def exponents(self):
        return sorted(self.c)

    def items(self):
        return sorted(self.c.items())

    @property
    def floor(self) -> int:
        return min(self.c) if self.c else self.order

    def valuation(self) -> int:
        ks = [k for k, a in self.c.items() if not is_zeroish(a)]
        return min(ks) if ks else self.order

    def principal_part(self):
        return {k: a for k, a in self.c.items() if k < 0}

    def truncate(self, M: int) -> "TruncSeries":
        if M >= self.order:
            return self
        return self._new({k: a for k, a in self.c.items() if k < M}, M)

    def map(self, fn) -> "TruncSeries":
        return self._new({k: fn(a) for k, a in self.c.items()}, self.order)

    def with_var(self, var: str) -> "TruncSeries":
        return TruncSeries(self.c, self.order, var)

    def __repr__(self):
        return f"TruncSeries({self.serialize()})"

    def serialize(self) -> str:
        body = " ".join(f"{k}:{serialize_scalar(a)}" for k, a in self.items())
        return f"{body} ;O({self.var}^{self.order})"

    # --- comparison ------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if self.order != other.order:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return all(is_zeroish(a) for a in self.c.values())

    def agrees_with(self, other: "TruncSeries", through: int | None = None) -> bool:
        """Coefficients agree below ``through`` (default: the common order)."""
        M = min(self.order, other.order) if through is None else through
        if M > min(self.order, other.order):
            raise TruncationError("comparison beyond known coefficients")
        d = self.truncate(M) - other.truncate(M)
        return d.is_zero()

    # --- ring operations ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            return other
        return TruncSeries({0: other}, INF_ORDER, self.var)

    def __add__(self, other):
        o = self._coerce(other)
        M = min(self.order, o.order)
        out = {k: a for k, a in self.c.items() if k < M}
        for k, b in o.c.items():
            if k < M:
                out[k] = out[k] + b if k in out else b
        return self._new(out, M)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -a for k, a in self.c.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return self._new({k: a * other for k, a in self.c.items()}, self.order)
        va, vb = self.valuation(), other.valuation()
        M = min(self.order + vb, other.order + va)
        A = sorted(self.c.items())
        B = sorted(other.c.items())
        out = {}
        for i, a in A:
            lim = M - i
            for j, b in B:
                if j >= lim:
                    break
                k = i + j
                t = a * b
                out[k] = out[k] + t if k in out else t
        return self._new(out, M)

    def __rmul__(self, other):
        return self._new({k: other * a for k, a in self.c.items()}, self.order)

    def shift(self, n: int) -> "TruncSeries":
        """Multiply by var^n."""
        return self._new({k + n: a for k, a in self.c.items()}, self.order + n)

    def scale(self, t) -> "TruncSeries":
        """Return f(t*var)."""
        out = {}
        for k, a in self.c.items():
            out[k] = a * (t ** k if k >= 0 else _inv(t) ** (-k))
        return self._new(out, self.order)

    def inverse(self) -> "TruncSeries":
        v = self.valuation()
        if v >= self.order:
            raise DomainError("cannot invert a series with no known nonzero coefficient")
        if self.order >= INF_ORDER:
            nonzero = [k for k, a in self.c.items() if not is_exact_zero(a)]
            if len(nonzero) == 1:
                return self._new({-v: _inv(self.c[v])}, INF_ORDER)
            raise TruncationError("the inverse of an exact polynomial needs a truncation order")
        n = self.order - v
        h = [self.c.get(v + k, 0) for k in range(n)]
        c0inv = _inv(h[0])
        g = [c0inv]
        for m in range(1, n):
            acc = None
            for k in range(1, m + 1):
                if is_exact_zero(h[k]):
                    continue
                t = h[k] * g[m - k]
                acc = t if acc is None else acc + t
            g.append(0 if acc is None else -(acc * c0inv))
        return self._new({k - v: a for k, a in enumerate(g)}, n - v)

    def __truediv__(self, other):
        if isinstance(other, TruncSeries):
            return self * other.inverse()
        return self * _inv(other)

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return self._new({0: 1}, INF_ORDER)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # --- calculus ---------------------------------------------------------------
    def derivative(self) -> "TruncSeries":
        return self._new({k - 1: a * k for k, a in self.c.items() if k != 0}, self.order - 1)

    def integral(self) -> "TruncSeries":
        """Antiderivative with zero constant term."""
        r = self.c.get(-1)
        if r is not None and not is_zeroish(r):
            raise ResidueError("cannot integrate a nonzero var^-1 term")
        return self._new({k + 1: a * Fraction(1, k + 1) for k, a in self.c.items() if k != -1}, self.order + 1)

    # --- composition and friends ------------------------------------------------
    def compose(self, g: "TruncSeries") -> "TruncSeries":
        """Return self(g) for g with g(0) = 0 and no principal part."""
        if any(k <= 0 and not is_zeroish(a) for k, a in g.c.items()):
            raise CompositionError("inner series must have zero constant term and no principal part")
        vg = g.valuation()
        if vg >= g.order:
            raise CompositionError("inner series has no known nonzero coefficient")
        neg = {k: a for k, a in self.c.items() if k < 0}
        if neg and vg != 1:
            raise CompositionError("principal part requires an inner series of valuation one")
        T = vg * self.order if self.order < INF_ORDER else INF_ORDER
        ks = [k for k in self.c if k != 0]
        if ks:
            T = min(T, min(ks) * vg + g.order - vg)
        g_full = g
        g = g.truncate(T)
        pos = {k: a for k, a in self.c.items() if k > 0}
        const = self.c.get(0)
        res = TruncSeries({0: const} if const is not None else {}, T, g.var)
        if pos:
            K = min(max(pos) + 1, -(-T // vg))
            B = max(1, math.isqrt(K - 1) + 1)
            baby = [None, g]
            for _ in range(2, B + 1):
                baby.append((baby[-1] * g).truncate(T))
            G = baby[B]
            chunks = -(-K // B)
            acc = None
            for j in range(chunks - 1, -1, -1):
                part = TruncSeries({}, T, g.var)
                for i in range(B):
                    k = j * B + i
                    a = pos.get(k)
                    if a is None or k >= K:
                        continue
                    part = part + (baby[i] * a if i else TruncSeries({0: a}, T, g.var))
                acc = part if acc is None else (acc * G).truncate(T) + part
            res = res + acc
        if neg:
            ginv = g_full.inverse()
            pw = ginv
            for k in range(-1, min(neg) - 1, -1):
                if k in neg:
                    res = res + pw * neg[k]
                if k > min(neg):
                    pw = pw * ginv
        return res.truncate(min(res.order, T))

    def exp(self) -> "TruncSeries":
        if any(k <= 0 and not is_zeroish(a) for k, a in self.c.items()):
            raise DomainError("exp needs zero constant term and no principal part")
        M = self.order
        f = [self.c.get(k, 0) for k in range(M)]
        e = [1]
        for n in range(1, M):
            acc = None
            for k in range(1, n + 1):
                if is_exact_zero(f[k]):
                    continue
                t = f[k] * e[n - k] * k
                acc = t if acc is None else acc + t
            e.append(0 if acc is None else acc * Fraction(1, n))
        return self._new(dict(enumerate(e)), M)

    def log(self) -> "TruncSeries":
        if any(k < 0 and not is_zeroish(a) for k, a in self.c.items()):
            raise DomainError("log needs a series without principal part")
        c0 = self.c.get(0, 0)
        if is_zeroish(c0 - 1):
            return (self.derivative() / self).integral()
        raise DomainError("log needs constant term 1")

    def reversion(self) -> "TruncSeries":
        """Compositional inverse h with self(h(s)) = s."""
        if any(k <= 0 and not is_zeroish(a) for k, a in self.c.items()):
            raise DomainError("reversion needs zero constant term and no principal part")
        c1 = self.c.get(1)
        if c1 is None or is_zeroish(c1):
            raise DomainError("reversion needs an invertible linear coefficient")
        M = self.order
        inv1 = _inv(c1)
        h = TruncSeries({1: inv1}, min(2, M), self.var)
        n = 2
        dg = self.derivative()
        while n < M:
            n2 = min(2 * n, M)
            hh = TruncSeries(h.c, n2, self.var)
            e = self.truncate(n2).compose(hh) - TruncSeries({1: 1}, n2, self.var)
            d = dg.truncate(n2 - 1).compose(hh)
            corr = (e.truncate(n2) * d.inverse()).truncate(n2)
            h = TruncSeries((hh - corr).c, n2, self.var)
            n = n2
        return h.truncate(M)


# ---------------------------------------------------------------------------
# Two variables
# ---------------------------------------------------------------------------


class TruncSeries2:
    """sum c_{i,j} u^i v^j known on the rectangle i < Mu, j < Mv."""

    __slots__ = ("c", "orders", "vars")

    def __init__(self, coeffs=None, orders=(INF_ORDER, INF_ORDER), vars=("z", "w")):
        self.orders = tuple(orders)
        self.vars = tuple(vars)
        Mu, Mv = self.orders
        self.c = {}
        if coeffs:
            for (i, j), a in coeffs.items():
                if i < Mu and j < Mv and not is_exact_zero(a):
                    self.c[(i, j)] = a

    def _new(self, coeffs, orders):
        return TruncSeries2(coeffs, orders, self.vars)

    @classmethod
    def from_u(cls, f: TruncSeries, vars=("z", "w")):
        """Series in the first variable only (exact in the second)."""
        return cls({(k, 0): a for k, a in f.c.items()}, (f.order, INF_ORDER), vars)

    @classmethod
    def from_v(cls, f: TruncSeries, vars=("z", "w")):
        return cls({(0, k): a for k, a in f.c.items()}, (INF_ORDER, f.order), vars)

    @classmethod
    def from_sum(cls, f: TruncSeries, orders, vars=("z", "w")):
        """f(u + v) for a power series f, cropped to the given rectangle."""
        Mu, Mv = orders
        if f.floor < 0:
            raise CompositionError("f(u+v) needs a power series")
        if Mu + Mv - 1 > f.order:
            raise TruncationError("f(u+v) needs f known through total degree Mu+Mv-2")
        out = {}
        for k, a in f.c.items():
            for i in range(max(0, k - Mv + 1), min(k, Mu - 1) + 1):
                out[(i, k - i)] = a * math.comb(k, i)
        return cls(out, orders, vars)

    def coeff(self, i, j):
        if i >= self.orders[0] or j >= self.orders[1]:
            raise TruncationError(f"coefficient ({i},{j}) outside the known rectangle {self.orders}")
        return self.c.get((i, j), 0)

    def floors(self):
        if not self.c:
            return self.orders
        return (min(i for i, _ in self.c), min(j for _, j in self.c))

    def valuations(self):
        ks = [k for k, a in self.c.items() if not is_zeroish(a)]
        if not ks:
            return self.orders
        return (min(i for i, _ in ks), min(j for _, j in ks))

    def truncate(self, orders):
        Mu = min(self.orders[0], orders[0])
        Mv = min(self.orders[1], orders[1])
        return self._new(self.c, (Mu, Mv))

    def __add__(self, other):
        if not isinstance(other, TruncSeries2):
            other = TruncSeries2({(0, 0): other}, (INF_ORDER, INF_ORDER), self.vars)
        orders = (min(self.orders[0], other.orders[0]), min(self.orders[1], other.orders[1]))
        out = dict(self.c)
        for k, b in other.c.items():
            out[k] = out[k] + b if k in out else b
        return self._new(out, orders)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -a for k, a in self.c.items()}, self.orders)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncSeries2) else -other)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries2):
            return self._new({k: a * other for k, a in self.c.items()}, self.orders)
        (fa, ga), (fb, gb) = self.valuations(), other.valuations()
        Mu = min(self.orders[0] + fb, other.orders[0] + fa)
        Mv = min(self.orders[1] + gb, other.orders[1] + ga)
        out = {}
        for (i1, j1), a in self.c.items():
            for (i2, j2), b in other.c.items():
                i, j = i1 + i2, j1 + j2
                if i >= Mu or j >= Mv:
                    continue
                t = a * b
                out[(i, j)] = out[(i, j)] + t if (i, j) in out else t
        return self._new(out, (Mu, Mv))

    def __rmul__(self, other):
        return self._new({k: other * a for k, a in self.c.items()}, self.orders)

    def exp(self) -> "TruncSeries2":
        """exp of a series whose terms all carry a positive power of the second variable."""
        if any(j <= 0 for (_, j), a in self.c.items() if not is_zeroish(a)):
            raise DomainError("two-variable exp needs positive valuation in the second variable")
        Mv = self.orders[1]
        result = TruncSeries2({(0, 0): 1}, (INF_ORDER, INF_ORDER), self.vars)
        term = result
        for m in range(1, Mv):
            term = (term * self) * Fraction(1, m)
            if not term.c and term.orders[1] >= Mv:
                break
            result = result + term
        return result.truncate((INF_ORDER, Mv))

    def transpose(self) -> "TruncSeries2":
        return TruncSeries2({(j, i): a for (i, j), a in self.c.items()},
                            (self.orders[1], self.orders[0]), (self.vars[1], self.vars[0]))

    def row(self, j: int) -> TruncSeries:
        """Coefficient of v^j as a series in u."""
        if j >= self.orders[1]:
            raise TruncationError(f"row {j} outside the known rectangle")
        return TruncSeries({i: a for (i, jj), a in self.c.items() if jj == j}, self.orders[0], self.vars[0])

    def is_zero(self) -> bool:
        return all(is_zeroish(a) for a in self.c.values())

    def __eq__(self, other):
        if not isinstance(other, TruncSeries2):
            return NotImplemented
        return self.orders == other.orders and (self - other).is_zero()

    __hash__ = None

    def serialize(self) -> str:
        body = " ".join(f"{i},{j}:{serialize_scalar(a)}" for (i, j), a in sorted(self.c.items()))
        return f"{body} ;O({self.vars[0]}^{self.orders[0]},{self.vars[1]}^{self.orders[1]})"

    def __repr__(self):
        return f"TruncSeries2({self.serialize()})"
