"""Complex-numeric side: periods, theta-function Weierstrass functions, Eisenstein-Kronecker-Lerch
series through the incomplete-gamma integral expression, Eisenstein functions and the real-analytic
polylogarithm family obtained by path integration.

Bounds reported here are heuristic tail bounds (Gaussian decay of the theta sums), not interval
arithmetic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
from numpy.polynomial import chebyshev as cheb

from .errors import ConvergenceBudget, DomainError, NotElliptic, PathThroughLattice, PoleError, UnknownIdentity
from .exactnum import embed_complex
from .weierstrass import CurveData, TorsionPoint, _xy

DEFAULT_DPS = 30
RADIUS_CAP = 40          # lattice-sum radius cap, in units of the longest reduced period
BASEPOINT_FACTOR = 0.35  # G-family basepoint is this multiple of gamma1 + gamma2


# ---------------------------------------------------------------------------
# Lattice
# ---------------------------------------------------------------------------


def _eisenstein_e4_e6(tau):
    q = mp.exp(2j * mp.pi * tau)
    s4 = s6 = mp.mpc(0)
    n = 1
    qn = q
    while True:
        d = qn / (1 - qn)
        t4, t6 = n ** 3 * d, n ** 5 * d
        s4 += t4
        s6 += t6
        if abs(t6) < mp.eps * 1e-3:
            break
        n += 1
        qn *= q
    return 1 + 240 * s4, 1 - 504 * s6


def _reduce_basis(g1, g2):
    """Return (g1, g2) spanning the same lattice with tau = g1/g2 in the standard fundamental domain."""
    for _ in range(200):
        tau = g1 / g2
        n = int(mp.nint(tau.real))
        g1 = g1 - n * g2
        if abs(g1) < abs(g2) * (1 - mp.mpf(10) ** (-mp.mp.dps // 2)):
            g1, g2 = -g2, g1
            continue
        return g1, g2
    raise ConvergenceBudget("basis reduction did not terminate")


def invariants_of_basis(g1, g2):
    """(g2, g3) of the lattice Z g1 + Z g2 via the q-expansions of E4 and E6."""
    tau = g1 / g2
    e4, e6 = _eisenstein_e4_e6(tau)
    return (2 * mp.pi / g2) ** 4 * e4 / 12, (2 * mp.pi / g2) ** 6 * e6 / 216


def _at_dps(fn):
    """Run a lattice method at the lattice's working precision."""
    def wrapped(self, *args):
        with mp.workdps(self.dps):
            return +fn(self, *args)
    wrapped.__name__, wrapped.__doc__ = fn.__name__, fn.__doc__
    return wrapped


@dataclass(frozen=True)
class LatticeData:
    gamma1: mp.mpc
    gamma2: mp.mpc
    dps: int
    curve_key: str = ""

    @property
    def A(self):
        with mp.workdps(self.dps):
            return ((self.gamma1 * mp.conj(self.gamma2) - self.gamma2 * mp.conj(self.gamma1)) / (2j * mp.pi)).real

    @property
    def tau(self):
        return self.gamma1 / self.gamma2

    @_at_dps
    def pair(self, z, w):
        """<z, w> = exp((z conj(w) - conj(z) w) / A)."""
        return mp.exp((z * mp.conj(w) - mp.conj(z) * w) / self.A)

    def coords(self, z):
        """Real (m, n) with z = m gamma1 + n gamma2."""
        a, b = self.gamma1, self.gamma2
        det = (a.real * b.imag - a.imag * b.real)
        m = (z.real * b.imag - z.imag * b.real) / det
        n = (a.real * z.imag - a.imag * z.real) / det
        return m, n

    def in_lattice(self, z, tol=None) -> bool:
        tol = tol if tol is not None else mp.mpf(10) ** (-(self.dps // 2))
        m, n = self.coords(mp.mpc(z))
        return abs(m - mp.nint(m)) < tol and abs(n - mp.nint(n)) < tol

    def nearest_lattice_distance(self, z):
        m, n = self.coords(mp.mpc(z))
        best = None
        for dm, dn in itertools.product((-1, 0, 1, 2), repeat=2):
            g = (mp.floor(m) + dm) * self.gamma1 + (mp.floor(n) + dn) * self.gamma2
            d = abs(z - g)
            best = d if best is None else min(best, d)
        return best

    # theta-function realization of sigma, zeta, wp
    @property
    def _theta_data(self):
        return _theta_constants(self.gamma1, self.gamma2, self.dps)

    def _v(self, z):
        return mp.pi * z / self.gamma2

    @_at_dps
    def sigma(self, z):
        q, t1, c = self._theta_data
        return self.gamma2 / mp.pi * mp.exp(c * z * z) * mp.jtheta(1, self._v(z), q) / t1

    @_at_dps
    def zeta(self, z):
        q, _, c = self._theta_data
        v = self._v(z)
        return 2 * c * z + (mp.pi / self.gamma2) * mp.jtheta(1, v, q, 1) / mp.jtheta(1, v, q)

    @_at_dps
    def wp(self, z):
        q, _, c = self._theta_data
        v = self._v(z)
        t0, t1, t2 = (mp.jtheta(1, v, q, k) for k in range(3))
        return -2 * c - (mp.pi / self.gamma2) ** 2 * (t2 * t0 - t1 * t1) / (t0 * t0)

    @_at_dps
    def dwp(self, z):
        q, _, _ = self._theta_data
        v = self._v(z)
        t0, t1, t2, t3 = (mp.jtheta(1, v, q, k) for k in range(4))
        return -(mp.pi / self.gamma2) ** 3 * (t3 * t0 * t0 - 3 * t2 * t1 * t0 + 2 * t1 ** 3) / t0 ** 3

    @property
    def e2star(self):
        _, _, c = self._theta_data
        return 2 * c - mp.conj(self.gamma2) / (self.A * self.gamma2)

    @_at_dps
    def F1(self, z):
        return self.zeta(z) - self.e2star * z

    @_at_dps
    def theta(self, z):
        return mp.exp(-self.e2star * z * z / 2) * self.sigma(z)

    @_at_dps
    def kronecker_theta(self, z, w):
        """Theta(z, w) = theta(z + w) / (theta(z) theta(w))."""
        return self.theta(z + w) / (self.theta(z) * self.theta(w))

    @_at_dps
    def theta_translated(self, z0, z, w):
        """Theta_{z0,0}(z, w) = exp(-w conj(z0)/A) Theta(z + z0, w)."""
        return mp.exp(-w * mp.conj(z0) / self.A) * self.kronecker_theta(z + z0, w)

    @property
    def basepoint(self):
        return BASEPOINT_FACTOR * (self.gamma1 + self.gamma2)


@lru_cache(maxsize=32)
def _theta_constants(g1, g2, dps):
    with mp.workdps(dps + 10):
        q = mp.exp(1j * mp.pi * g1 / g2)
        t1 = mp.jtheta(1, 0, q, 1)
        t3 = mp.jtheta(1, 0, q, 3)
        c = -(t3 / (6 * t1)) * (mp.pi / g2) ** 2
        return q, t1, c


def lattice_of_curve(c: CurveData, prec: int = DEFAULT_DPS) -> LatticeData:
    """Period lattice of y^2 = 4x^3 - g2 x - g3 via Legendre K, K' and validated by E4, E6."""
    with mp.workdps(prec + 10):
        g2, g3 = embed_complex(c.g2, prec + 10), embed_complex(c.g3, prec + 10)
        if abs(g2 ** 3 - 27 * g3 ** 2) < mp.mpf(10) ** (-prec):
            raise NotElliptic("discriminant vanishes")
        roots = mp.polyroots([4, 0, -g2, -g3], maxsteps=200, extraprec=2 * prec)
        scale = 1 + abs(g2) + abs(g3)
        best = None
        for e1, e2, e3 in itertools.permutations(roots):
            m = (e2 - e3) / (e1 - e3)
            r = mp.sqrt(e1 - e3)
            w1 = 2 * mp.ellipk(m) / r
            w2 = 2j * mp.ellipk(1 - m) / r
            if abs((w2 / w1).imag) < mp.mpf(10) ** (-5):
                continue
            if (w2 / w1).imag < 0:
                w2 = -w2
            a, b = _reduce_basis(w2, w1)
            h2, h3 = invariants_of_basis(a, b)
            err = (abs(h2 - g2) + abs(h3 - g3)) / scale
            if best is None or err < best[0]:
                best = (err, a, b)
        if best is None or best[0] > mp.mpf(10) ** (-prec + 2):
            raise ConvergenceBudget("no root labelling reproduced (g2, g3)")
        _, a, b = best
        return LatticeData(+a, +b, prec, c.key())


def point_to_z(L: LatticeData, P, order: int | None = None):
    """Complex coordinate of a torsion point: z = (k gamma1 + l gamma2)/n with wp, wp' matching."""
    if isinstance(P, TorsionPoint):
        order = order or P.order
    x, y = _xy(P)
    with mp.workdps(L.dps):
        xc, yc = embed_complex(x, L.dps), embed_complex(y, L.dps)
        tol = mp.mpf(10) ** (-(L.dps // 2))
        for n in ([order] if order else range(2, 25)):
            for k, l in itertools.product(range(n), repeat=2):
                if k == 0 and l == 0:
                    continue
                z = (k * L.gamma1 + l * L.gamma2) / n
                if abs(L.wp(z) - xc) < tol * (1 + abs(xc)) and abs(L.dwp(z) - yc) < tol * (1 + abs(yc)):
                    return z
    raise DomainError("no torsion coordinate matches the point")


# ---------------------------------------------------------------------------
# Eisenstein-Kronecker-Lerch series
# ---------------------------------------------------------------------------


@dataclass
class EKLValue:
    a: int
    z0: object
    w0: object
    s: object
    value: mp.mpc
    bound: float

    def __complex__(self):
        return complex(self.value)


def _cutoff(L: LatticeData, a: int, s, prec: int):
    """x-cutoff X so that exp(-x) x^(a/2 + Re s) stays below 10^-(prec+3) beyond X."""
    X = (prec + 3) * math.log(10)
    growth = abs(a) / 2 + max(float(mp.re(s)), 0) + 2
    for _ in range(6):
        X = (prec + 3) * math.log(10) + growth * math.log(max(X, 1.0)) + math.log(float(L.A) + 1) * abs(a) / 2 + 3
    return X


def _shell_points(L: LatticeData, center, X):
    """Lattice points gamma with |center + gamma|^2 / A <= X."""
    R = mp.sqrt(X * L.A)
    if R > RADIUS_CAP * max(abs(L.gamma1), abs(L.gamma2)) + abs(center):
        raise ConvergenceBudget("lattice-sum radius exceeds the configured cap")
    m0, n0 = L.coords(-center)
    a, b = L.gamma1, L.gamma2
    det = abs(a.real * b.imag - a.imag * b.real)
    bm = int(mp.ceil(R * abs(b) / det)) + 1
    bn = int(mp.ceil(R * abs(a) / det)) + 1
    mc, nc = int(mp.nint(m0)), int(mp.nint(n0))
    for m in range(mc - bm, mc + bm + 1):
        for n in range(nc - bn, nc + bn + 1):
            g = m * a + n * b
            if abs(center + g) ** 2 <= X * L.A:
                yield g


def _incomplete_sum(L: LatticeData, a: int, z0, w0, s, X):
    """I_a(z0, w0, s) = sum* <gamma, w0> conj(z0 + gamma)^a x^-s Gamma(s, x), x = |z0 + gamma|^2/A."""
    total = mp.mpc(0)
    tiny = mp.mpf(10) ** (-(L.dps // 2))
    A = L.A
    for g in _shell_points(L, z0, X):
        u = z0 + g
        if abs(u) < tiny:
            continue
        x = abs(u) ** 2 / A
        total += L.pair(g, w0) * mp.conj(u) ** a * x ** (-s) * mp.gammainc(s, x)
    return total


def _is_nonpositive_int(s) -> bool:
    return abs(mp.im(s)) == 0 and mp.re(s) <= 0 and mp.re(s) == mp.nint(mp.re(s))


def _kstar_nonneg(L: LatticeData, a: int, z0, w0, s, prec: int):
    z0, w0, s = mp.mpc(z0), mp.mpc(w0), mp.mpmathify(s)
    z_in, w_in = L.in_lattice(z0), L.in_lattice(w0)
    if a == 0 and w_in and abs(s - 1) == 0:
        raise PoleError("K*_0(z0, w0, s) has a pole at s = 1 for w0 in the lattice")
    pr = L.pair(w0, z0)
    if _is_nonpositive_int(s):
        return -pr if (s == 0 and a == 0 and z_in) else mp.mpc(0)
    X1 = _cutoff(L, a, s, prec)
    X2 = _cutoff(L, a, a + 1 - s, prec)
    rhs = _incomplete_sum(L, a, z0, w0, s, X1) + _incomplete_sum(L, a, w0, z0, a + 1 - s, X2) * pr
    if a == 0 and z_in:
        rhs -= pr / s
    if a == 0 and w_in:
        rhs += 1 / (s - 1)
    return rhs / (L.A ** s * mp.gamma(s))


def kstar(L: LatticeData, a: int, z0, w0, s, prec: int | None = None):
    """K*_a(z0, w0, s) for any integer a; a < 0 through the reflection rule."""
    prec = prec or L.dps - 5
    with mp.workdps(L.dps):
        if a >= 0:
            return _kstar_nonneg(L, a, z0, w0, s, prec)
        s = mp.mpmathify(s)
        return (-1) ** a * mp.conj(_kstar_nonneg(L, -a, -mp.mpc(z0), w0, mp.conj(s) - a, prec))


def ekl_numeric(L: LatticeData, a: int, z0, w0, s, prec: int | None = None) -> EKLValue:
    prec = prec or L.dps - 5
    return EKLValue(a, z0, w0, s, kstar(L, a, z0, w0, s, prec), 10.0 ** (-prec))


def ekl_direct(L: LatticeData, a: int, z0, w0, s, radius: int = 40):
    """Eisenstein-ordered direct summation; only meaningful when Re(s) > a/2 + 1."""
    if mp.re(s) <= a / 2 + 1:
        raise DomainError("direct summation diverges here")
    with mp.workdps(L.dps):
        z0, w0 = mp.mpc(z0), mp.mpc(w0)
        tiny = mp.mpf(10) ** (-(L.dps // 2))
        total = mp.mpc(0)
        for m in range(-radius, radius + 1):
            for n in range(-radius, radius + 1):
                g = m * L.gamma1 + n * L.gamma2
                u = z0 + g
                if abs(u) < tiny:
                    continue
                total += mp.conj(u) ** a / abs(u) ** (2 * s) * L.pair(g, w0)
        return total


def ek_numeric(L: LatticeData, a: int, b: int, z0):
    """e*_{a,b}(z0) = K*_{a+b}(0, z0, b)."""
    return kstar(L, a + b, 0, z0, b)


def eisenstein_E(L: LatticeData, m: int, b: int, z, prec: int | None = None):
    """E_{m,b}(z) = K*_{b-m}(0, z, b) for z off the lattice."""
    if L.in_lattice(mp.mpc(z)):
        raise DomainError("E_{m,b} is defined off the lattice")
    return kstar(L, b - m, 0, z, b, prec)


# ---------------------------------------------------------------------------
# Real-analytic polylogarithm family
# ---------------------------------------------------------------------------


@dataclass
class HodgeValues:
    z: complex
    G: dict
    D: dict
    Dstar: dict
    path: tuple
    monodromy_note: str | None = None


def _segment_check(L: LatticeData, za, zb, clearance):
    for t in np.linspace(0.0, 1.0, 65):
        if L.nearest_lattice_distance(za + t * (zb - za)) < clearance:
            raise PathThroughLattice(f"segment {complex(za)} -> {complex(zb)} passes too close to the lattice")


def _cheb_integral(values: np.ndarray, nodes_x: np.ndarray):
    """Cumulative integral over t in [0, 1] of samples at Chebyshev nodes: (values at nodes, total)."""
    deg = len(nodes_x) - 1
    ir = cheb.chebint(cheb.chebfit(nodes_x, values.real, deg), lbnd=-1)
    ii = cheb.chebint(cheb.chebfit(nodes_x, values.imag, deg), lbnd=-1)
    at_nodes = 0.5 * (cheb.chebval(nodes_x, ir) + 1j * cheb.chebval(nodes_x, ii))
    total = 0.5 * (cheb.chebval(1.0, ir) + 1j * cheb.chebval(1.0, ii))
    return at_nodes, total


def _G_closed_m0(m: int, z: np.ndarray):
    return -((-z) ** m) / math.factorial(m)


def _basepoint_constants(L: LatticeData, mmax: int, bmax: int):
    """Initial G_{m,b}(z*) (m, b >= 1) chosen so the relation with E_{m,b} holds at the basepoint."""
    zs = L.basepoint
    A = float(L.A)
    zc = complex(zs)
    C = {}
    for m in range(1, mmax + 1):
        for b in range(1, bmax + 1):
            rhs = A ** (m + b) * complex(eisenstein_E(L, m, b, zs)) - (-zc) ** m * np.conj(zc) ** b / (math.factorial(m) * math.factorial(b))
            if m == b:
                C[(m, b)] = complex((rhs / (2 * A ** m)).real, 0.0)
            elif m > b:
                C[(m, b)] = 0j
            else:
                C[(m, b)] = rhs / A ** b
    return C


def _integrate_segment(L: LatticeData, cur: dict, za, zb, mmax: int, bmax: int, nodes: int) -> dict:
    """Carry G_{m,b} (m, b >= 1) from za to zb along the straight segment."""
    A = float(L.A)
    delta = complex(zb - za)
    k = np.arange(nodes)
    xs = np.cos(np.pi * (2 * k + 1) / (2 * nodes))[::-1]
    zt = complex(za) + 0.5 * (xs + 1) * delta
    vals = {(0, b): np.array([complex(eisenstein_E(L, 0, b, mp.mpc(w))) for w in zt]) for b in range(1, bmax + 1)}
    vals[(0, 0)] = np.full(nodes, -1.0 + 0j)
    for m in range(1, mmax + 1):
        vals[(m, 0)] = _G_closed_m0(m, zt)
    out = dict(cur)
    for tot in range(2, mmax + bmax + 1):
        for m in range(max(1, tot - bmax), min(mmax, tot - 1) + 1):
            b = tot - m
            integrand = -vals[(m - 1, b)] * delta + vals[(m, b - 1)] * np.conj(delta) / A
            cum, total = _cheb_integral(integrand, xs)
            vals[(m, b)] = cur[(m, b)] + cum
            out[(m, b)] = cur[(m, b)] + total
    return out


def g_family(L: LatticeData, mmax: int, bmax: int, z, path=None, nodes: int = 40, clearance: float = 0.05,
             start=None) -> dict:
    """G_{m,b}(z) for 0 <= m <= mmax, 0 <= b <= bmax by integrating the closed forms.

    dG_{m,b} = -G_{m-1,b} dz + G_{m,b-1} dzbar / A, with G_{0,b} = E_{0,b} and G_{m,0} = -(-z)^m/m!.
    Integration starts at the basepoint, or at ``start = (z_s, G at z_s)`` when given.
    """
    zc = mp.mpc(z)
    if start is None:
        origin, cur = L.basepoint, (_basepoint_constants(L, mmax, bmax) if mmax and bmax else {})
    else:
        origin, G0 = mp.mpc(start[0]), start[1]
        cur = {k: v for k, v in G0.items() if k[0] >= 1 and k[1] >= 1}
    pts = [origin] + [mp.mpc(w) for w in (path or [])] + [zc]
    lim = clearance * float(min(abs(L.gamma1), abs(L.gamma2)))
    scale = float(min(abs(L.gamma1), abs(L.gamma2)))
    if mmax and bmax:
        for za, zb in zip(pts, pts[1:]):
            _segment_check(L, za, zb, lim)
            n_seg = max(8, min(nodes, int(math.ceil(nodes * float(abs(zb - za)) / scale))))
            cur = _integrate_segment(L, cur, za, zb, mmax, bmax, n_seg)
    out = {(0, 0): -1.0 + 0j}
    zf = complex(zc)
    for b in range(1, bmax + 1):
        out[(0, b)] = complex(eisenstein_E(L, 0, b, zc))
    for m in range(1, mmax + 1):
        out[(m, 0)] = complex(_G_closed_m0(m, np.array([zf]))[0])
        for b in range(1, bmax + 1):
            out[(m, b)] = cur[(m, b)]
    return out


def hodge_family(L: LatticeData, m: int, n: int, z, path=None, prec: int | None = None, nodes: int = 40,
                 compare_path=None, start: "HodgeValues | None" = None) -> HodgeValues:
    """G_{i,k}, D_{i,k}, D*_{i,k} at z for i <= m, k <= n.

    D_{m,n} = (-1)^(n-1) sum_k E_{0,1}^(n-k)/(n-k)! G_{m,k};  D*_{m,n} = D_{m,n} - (-1)^(m+n) z^m F1^n/(m! n!).
    """
    G = g_family(L, m, n, z, path, nodes, start=None if start is None else (start.z, start.G))
    e01 = G[(0, 1)] if n >= 1 else complex(eisenstein_E(L, 0, 1, mp.mpc(z)))
    f1 = complex(L.F1(mp.mpc(z)))
    zc = complex(z)
    D, Ds = {}, {}
    for i in range(m + 1):
        for k in range(n + 1):
            val = sum(e01 ** (k - j) / math.factorial(k - j) * G[(i, j)] for j in range(k + 1))
            D[(i, k)] = (-1) ** (k - 1) * val
            Ds[(i, k)] = D[(i, k)] - (-1) ** (i + k) * zc ** i * f1 ** k / (math.factorial(i) * math.factorial(k))
    note = None
    if compare_path is not None:
        G2 = g_family(L, m, n, z, compare_path, nodes)
        gap = max(abs(G2[key] - G[key]) for key in G)
        if gap > 1e-6:
            note = f"paths differ by {gap:.3e} (multivalued; values depend on the path class)"
    return HodgeValues(zc, G, D, Ds, tuple(path or ()), note)


# ---------------------------------------------------------------------------
# Identity registry
# ---------------------------------------------------------------------------


@dataclass
class ResidualReport:
    name: str
    params: dict
    residual: float
    bound: float
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.residual < self.bound

    def as_dict(self):
        return {"name": self.name, "params": {k: str(v) for k, v in self.params.items()},
                "residual": self.residual, "bound": self.bound, "passed": self.passed}


_REGISTRY = {}


def identity(name):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn
    return deco


def registered_identities():
    return sorted(_REGISTRY)


def verify_identity(name: str, params: dict | None = None) -> ResidualReport:
    if name not in _REGISTRY:
        raise UnknownIdentity(name)
    params = dict(params or {})
    return _REGISTRY[name](params)


def _lattice_from(params):
    from .weierstrass import preset

    c = params.get("curve")
    if c is None or isinstance(c, str):
        c = preset(c or "gauss")
    return c, lattice_of_curve(c, int(params.get("dps", DEFAULT_DPS)))


def _grid(L: LatticeData, npts: int, seed: int = 7):
    """Deterministic points inside the fundamental parallelogram, away from the lattice."""
    out = []
    for k in range(npts):
        u = 0.17 + 0.61 * ((k * 0.618034 + seed * 0.1) % 1.0)
        v = 0.23 + 0.53 * ((k * 0.414214 + seed * 0.07) % 1.0)
        out.append(u * L.gamma1 + v * L.gamma2)
    return out


def _rel(a, b):
    return float(abs(a - b) / max(1, abs(a), abs(b)))


@identity("functional-equation")
def _id_functional(params):
    c, L = _lattice_from(params)
    a = int(params.get("a", 2))
    s = mp.mpmathify(params.get("s", mp.mpc(1.3, 0.2)))
    pts = _grid(L, int(params.get("points", 2)))
    res = 0.0
    with mp.workdps(L.dps):
        for z0, w0 in zip(pts, reversed(pts)):
            lhs = mp.gamma(s) * kstar(L, a, z0, w0, s)
            rhs = L.A ** (a + 1 - 2 * s) * mp.gamma(a + 1 - s) * kstar(L, a, w0, z0, a + 1 - s) * L.pair(w0, z0)
            res = max(res, _rel(lhs, rhs))
    return ResidualReport("functional-equation", params, res, float(params.get("bound", 1e-8)))


@identity("reflection")
def _id_reflection(params):
    c, L = _lattice_from(params)
    a = int(params.get("a", -2))
    s = mp.mpmathify(params.get("s", 6))
    res = 0.0
    for z0, w0 in zip(_grid(L, 2), _grid(L, 2, seed=3)):
        v = kstar(L, a, z0, w0, s)
        d = ekl_direct(L, a, z0, w0, s, int(params.get("radius", 30)))
        res = max(res, _rel(v, d))
    return ResidualReport("reflection", params, res, float(params.get("bound", 1e-8)))


@identity("direct-sum")
def _id_direct(params):
    c, L = _lattice_from(params)
    a = int(params.get("a", 2))
    s = mp.mpmathify(params.get("s", 6))
    res = 0.0
    for z0, w0 in zip(_grid(L, 2), _grid(L, 2, seed=5)):
        res = max(res, _rel(kstar(L, a, z0, w0, s), ekl_direct(L, a, z0, w0, s, int(params.get("radius", 30)))))
    return ResidualReport("direct-sum", params, res, float(params.get("bound", 1e-8)))


@identity("value-00")
def _id_value00(params):
    """K*_0(z0, w0, s) -> -<w0, z0> as s -> 0 for z0 in the lattice (evaluated at small s)."""
    c, L = _lattice_from(params)
    eps = mp.mpf(params.get("eps", 1e-14))
    res = 0.0
    for w0 in _grid(L, 2):
        for g in (0, L.gamma1, L.gamma1 - 2 * L.gamma2):
            res = max(res, _rel(kstar(L, 0, g, w0, eps), -L.pair(w0, g)))
    return ResidualReport("value-00", params, res, float(params.get("bound", 1e-8)))


@identity("zero")
def _id_zero(params):
    """e*_{0,0}(z0) = -1 and e*_{a,0}(z0) = 0 for a > 0, as limits s -> 0 of K*_a(0, z0, s)."""
    c, L = _lattice_from(params)
    eps = mp.mpf(params.get("eps", 1e-14))
    res = 0.0
    for z0 in _grid(L, 2):
        res = max(res, _rel(kstar(L, 0, 0, z0, eps), -1))
        for a in range(1, 4):
            res = max(res, float(abs(kstar(L, a, 0, z0, eps))))
    return ResidualReport("zero", params, res, float(params.get("bound", 1e-8)))


def _fd(f, z, h, direction):
    """Central difference of f along the real (direction=1) or imaginary (direction=1j) axis."""
    return (f(z + h * direction) - f(z - h * direction)) / (2 * h)


def _dz(f, z, h):
    return (_fd(f, z, h, 1) - 1j * _fd(f, z, h, 1j)) / 2


def _dzbar(f, z, h):
    return (_fd(f, z, h, 1) + 1j * _fd(f, z, h, 1j)) / 2


@identity("diff-Ka")
def _id_diff_ka(params):
    """d_z K_a = -s K_{a+1}(s+1), d_zbar K_a = (a-s) K_{a-1}, and the two w-derivatives."""
    c, L = _lattice_from(params)
    a = int(params.get("a", 1))
    s = mp.mpmathify(params.get("s", 2))
    h = mp.mpf(params.get("h", 1e-4))
    res = 0.0
    with mp.workdps(L.dps):
        A = L.A
        for z, w in zip(_grid(L, 2), _grid(L, 2, seed=11)):
            kz = lambda t: kstar(L, a, t, w, s)
            kw = lambda t: kstar(L, a, z, t, s)
            checks = [
                (_dz(kz, z, h), -s * kstar(L, a + 1, z, w, s + 1)),
                (_dzbar(kz, z, h), (a - s) * kstar(L, a - 1, z, w, s)),
                (_dz(kw, w, h), -(kstar(L, a + 1, z, w, s) - mp.conj(z) * kstar(L, a, z, w, s)) / A),
                (_dzbar(kw, w, h), (kstar(L, a - 1, z, w, s - 1) - z * kstar(L, a, z, w, s)) / A),
            ]
            for lhs, rhs in checks:
                res = max(res, _rel(lhs, rhs))
    return ResidualReport("diff-Ka", params, res, float(params.get("bound", 1e-5)))


@identity("diff-E")
def _id_diff_e(params):
    """d_z E_{m+1,b} = -E_{m,b}/A and d_zbar E_{m,b+1} = E_{m,b}/A."""
    c, L = _lattice_from(params)
    h = mp.mpf(params.get("h", 1e-4))
    res = 0.0
    with mp.workdps(L.dps):
        for z in _grid(L, 2):
            for m, b in ((0, 1), (1, 1), (0, 2), (1, 0)):
                lhs = _dz(lambda t: eisenstein_E(L, m + 1, b, t), z, h)
                res = max(res, _rel(lhs, -eisenstein_E(L, m, b, z) / L.A))
                lhs = _dzbar(lambda t: eisenstein_E(L, m, b + 1, t), z, h)
                res = max(res, _rel(lhs, eisenstein_E(L, m, b, z) / L.A))
    return ResidualReport("diff-E", params, res, float(params.get("bound", 1e-5)))


@identity("conjugation-E")
def _id_conj_e(params):
    c, L = _lattice_from(params)
    res = 0.0
    for z in _grid(L, 2):
        for m, b in ((0, 1), (1, 2), (2, 0), (0, 3)):
            res = max(res, _rel(mp.conj(eisenstein_E(L, m, b, z)), (-1) ** (b - m) * eisenstein_E(L, b, m, z)))
    return ResidualReport("conjugation-E", params, res, float(params.get("bound", 1e-8)))


@identity("periodicity-E")
def _id_period_e(params):
    c, L = _lattice_from(params)
    res = 0.0
    for z in _grid(L, 2):
        for m, b in ((0, 1), (1, 2), (2, 1)):
            v = eisenstein_E(L, m, b, z)
            for g in (L.gamma1, L.gamma2, L.gamma1 - L.gamma2):
                res = max(res, _rel(eisenstein_E(L, m, b, z + g), v))
    return ResidualReport("periodicity-E", params, res, float(params.get("bound", 1e-8)))


@identity("E01-F1")
def _id_e01(params):
    """E_{0,1}(z) = F1(z) - conj(z)/A, with F1 from theta functions and from the exact Laurent series."""
    from .weierstrass import wp_family

    c, L = _lattice_from(params)
    fam = wp_family(c, 30)
    res = 0.0
    with mp.workdps(L.dps):
        e2 = embed_complex(c.require_e2star(), L.dps)
        res = max(res, _rel(L.e2star, e2) if abs(e2) > 1e-12 else float(abs(L.e2star)))
        for z in list(_grid(L, 2)) + [mp.mpc(0.11, 0.07) * L.gamma2]:
            lhs = eisenstein_E(L, 0, 1, z)
            res = max(res, _rel(lhs, L.F1(z) - mp.conj(z) / L.A))
        z = mp.mpc(0.11, 0.07) * L.gamma2
        series = sum(embed_complex(v, L.dps) * z ** k for k, v in fam.F1.c.items())
        res = max(res, _rel(series, L.F1(z)) * 1e-2)
    return ResidualReport("E01-F1", params, res, float(params.get("bound", 1e-8)))


@identity("kronecker-theorem")
def _id_kronecker(params):
    """Theta(z, w) = exp(z conj(w)/A) K_1(z, w, 1)."""
    c, L = _lattice_from(params)
    res = 0.0
    with mp.workdps(L.dps):
        for z, w in zip(_grid(L, 3), _grid(L, 3, seed=13)):
            lhs = L.kronecker_theta(z, w)
            rhs = mp.exp(z * mp.conj(w) / L.A) * kstar(L, 1, z, w, 1)
            res = max(res, _rel(lhs, rhs))
    return ResidualReport("kronecker-theorem", params, res, float(params.get("bound", 1e-8)))


def quotient_reps(L: LatticeData, pi) -> list:
    """Representatives z_1 of pi^-1 Gamma / Gamma."""
    pic = complex(embed_complex(pi, L.dps)) if not isinstance(pi, (complex, mp.mpc)) else pi
    pic = mp.mpc(pic)
    norm = int(mp.nint(abs(pic) ** 2))
    reps = []
    for m, n in itertools.product(range(norm), repeat=2):
        z = (m * L.gamma1 + n * L.gamma2) / pic
        if all(not L.in_lattice(z - r) for r in reps):
            reps.append(z)
        if len(reps) == norm:
            break
    if len(reps) != norm:
        raise DomainError("pi does not act on the lattice")
    return reps


@identity("distribution-theta")
def _id_distribution(params):
    """Theta_{pi z0,0}(pi z, pibar^-1 w) = pi^-1 sum_{z1} Theta_{z0+z1,0}(z, w)."""
    c, L = _lattice_from(params)
    sp = c.prime_data()
    with mp.workdps(L.dps):
        pic = embed_complex(sp.pi, L.dps)
        reps = quotient_reps(L, pic)
        z0 = mp.mpc(params.get("z0", 0.31)) * L.gamma1 + mp.mpf(0.12) * L.gamma2
        w = mp.mpc(0.13, 0.05) * L.gamma2
        res = 0.0
        for z in _grid(L, int(params.get("points", 5)), seed=17):
            z = z * mp.mpf(0.2)
            lhs = L.theta_translated(pic * z0, pic * z, w / mp.conj(pic))
            rhs = sum(L.theta_translated(z0 + r, z, w) for r in reps) / pic
            res = max(res, _rel(lhs, rhs))
    return ResidualReport("distribution-theta", params, res, float(params.get("bound", 1e-6)))


def exact_map_value(h, x, y, dps):
    """Complex value of an exact U(x) + y V(x) at numeric (x, y)."""
    def ev(P):
        acc = mp.mpc(0)
        for coef in reversed(P.c):
            acc = acc * x + embed_complex(coef, dps)
        return acc
    val = ev(h.U.num) / ev(h.U.den)
    if not h.V.is_zero():
        val += y * ev(h.V.num) / ev(h.V.den)
    return val


@identity("hodge-D0n")
def _id_d0n(params):
    """D_{0,n}(z) equals the connection function L_n(z) on a grid."""
    from .kronecker import connection_map

    c, L = _lattice_from(params)
    nmax = int(params.get("n", 4))
    res = 0.0
    with mp.workdps(L.dps):
        for z in _grid(L, int(params.get("points", 5)), seed=19):
            hv = hodge_family(L, 0, nmax, z)
            x, y = L.wp(z), L.dwp(z)
            for n in range(nmax + 1):
                ref = exact_map_value(connection_map(c, n), x, y, L.dps)
                res = max(res, _rel(hv.D[(0, n)], ref))
    return ResidualReport("hodge-D0n", params, res, float(params.get("bound", 1e-6)))


@identity("hodge-first")
def _id_first(params):
    """d_z D_{m+1,n} = -D_{m,n} - D_{m+1,n-1} F1'(z), and d_zbar D_{m+1,n} = 0, by finite differences."""
    c, L = _lattice_from(params)
    n = int(params.get("n", 2))
    h = float(params.get("h", 1e-4))
    res = 0.0
    for z in _grid(L, int(params.get("points", 2)), seed=23):
        zc = complex(z)
        base = hodge_family(L, 1, n, zc)
        side = {}
        for d in (h, -h, 1j * h, -1j * h):
            side[d] = hodge_family(L, 1, n, zc + d, start=base)
        dF1 = complex(-L.wp(mp.mpc(zc)) - L.e2star)
        for k in range(n + 1):
            dx = (side[h].D[(1, k)] - side[-h].D[(1, k)]) / (2 * h)
            dy = (side[1j * h].D[(1, k)] - side[-1j * h].D[(1, k)]) / (2 * h)
            dz, dzb = (dx - 1j * dy) / 2, (dx + 1j * dy) / 2
            rhs = -base.D[(0, k)] - (base.D[(1, k - 1)] * dF1 if k >= 1 else 0)
            res = max(res, abs(dz - rhs) / max(1, abs(rhs)), abs(dzb) / max(1, abs(rhs)))
    return ResidualReport("hodge-first", params, res, float(params.get("bound", 1e-5)))


@identity("hodge-relation")
def _id_relation(params):
    """A^b G_{m,b} + (-1)^(m+b) A^m conj(G_{b,m}) = A^(m+b) E_{m,b} - (-z)^m conj(z)^b/(m! b!)."""
    c, L = _lattice_from(params)
    top = int(params.get("degree", 3))
    A = float(L.A)
    res = 0.0
    for z in _grid(L, int(params.get("points", 3)), seed=29):
        zc = complex(z)
        G = g_family(L, top, top, zc)
        for m in range(top + 1):
            for b in range(top + 1 - m):
                lhs = A ** b * G[(m, b)] + (-1) ** (m + b) * A ** m * np.conj(G[(b, m)])
                rhs = A ** (m + b) * complex(eisenstein_E(L, m, b, z)) - (-zc) ** m * np.conj(zc) ** b / (math.factorial(m) * math.factorial(b))
                res = max(res, abs(lhs - rhs) / max(1, abs(rhs)))
    return ResidualReport("hodge-relation", params, res, float(params.get("bound", 1e-6)))


@identity("damerell")
def _id_damerell(params):
    """e*_{a,b}(z0)/A^a numerically versus the exact algebraic value."""
    from .kronecker import ek_exact
    from .weierstrass import select_point

    c, L = _lattice_from(params)
    P = select_point(c, params.get("point", "point:1,0"))
    z0 = point_to_z(L, P, int(params["order"]) if "order" in params else None)
    top = int(params.get("max", 4))
    res = 0.0
    for a in range(top + 1):
        for b in range(top + 1):
            if a == 0 and b == 0:
                continue
            num = ek_numeric(L, a, b, z0) / L.A ** a
            ex = embed_complex(ek_exact(c, P, a, b), L.dps)
            res = max(res, float(abs(num - ex)))
    return ResidualReport("damerell", params, res, float(params.get("bound", 1e-8)))
