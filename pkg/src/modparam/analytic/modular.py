"""Gamma0(N): coset representatives, cusps, and fundamental-domain reduction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath

from ..curve import factorint, gamma0_index


def _egcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def divisors(n):
    ds = [1]
    for p, e in factorint(n).items():
        ds = [d * p ** k for d in ds for k in range(e + 1)]
    return sorted(ds)


def euler_phi(n):
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out


class Matrix2(tuple):
    """Integer 2x2 matrix ((a, b), (c, d)) stored as the tuple (a, b, c, d)."""

    def __new__(cls, a, b, c, d):
        return super().__new__(cls, (int(a), int(b), int(c), int(d)))

    @property
    def det(self):
        a, b, c, d = self
        return a * d - b * c

    def __matmul__(self, o):
        a, b, c, d = self
        e, f, g, h = o
        return Matrix2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self):
        a, b, c, d = self
        if self.det != 1:
            raise ValueError("only SL2(Z) matrices are inverted")
        return Matrix2(d, -b, -c, a)

    def act(self, tau):
        """Moebius action on a complex number, an exact cusp, or infinity."""
        a, b, c, d = self
        if isinstance(tau, Cusp):
            s, r = tau.s, tau.r
            num, den = a * s + b * r, c * s + d * r
            return Cusp.from_pair(num, den)
        return (a * tau + b) / (c * tau + d)

    def in_gamma0(self, N):
        return self.det == 1 and self[2] % N == 0

    def __repr__(self):
        a, b, c, d = self
        return f"[[{a}, {b}], [{c}, {d}]]"

    def tolist(self):
        a, b, c, d = self
        return [[a, b], [c, d]]


IDENTITY = Matrix2(1, 0, 0, 1)


def sl2_lift(c, d):
    """A matrix in SL2(Z) with bottom row (c, d); gcd(c, d) must be 1."""
    g, x, y = _egcd(d, c)
    if abs(g) != 1:
        raise ValueError("bottom row must be coprime")
    # a d - b c = 1 with a = x/g, b = -y/g
    return Matrix2(x * g, -y * g, c, d)


def coset_reps(N):
    """Right coset representatives of Gamma0(N) in SL2(Z), one per point of P1(Z/N)."""
    if N < 1:
        raise ValueError("N must be positive")
    if N == 1:
        return [IDENTITY]
    units = [u for u in range(1, N) if gcd(u, N) == 1]
    seen = set()
    reps = []
    for c in range(N):
        for d in range(N):
            if (c, d) in seen or gcd(gcd(c, d), N) != 1:
                continue
            for u in units:
                seen.add((u * c % N, u * d % N))
            reps.append(_lift_mod_n(c, d, N))
    assert len(reps) == gamma0_index(N)
    return reps


def _lift_mod_n(c, d, N):
    if c == 0:
        # (0 : d) with d a unit is the class of the identity
        return IDENTITY
    dd = d
    while gcd(c, dd) != 1:
        dd += N
    return sl2_lift(c, dd)


@dataclass(frozen=True)
class Cusp:
    """The cusp s/r in lowest terms; r = 0 encodes infinity as 1/0."""

    s: int
    r: int

    def __post_init__(self):
        if self.r < 0 or gcd(self.s, self.r) != 1:
            raise ValueError(f"cusp {self.s}/{self.r} not in normal form")
        if self.r == 0 and self.s != 1:
            raise ValueError("infinity must be written 1/0")

    @classmethod
    def from_pair(cls, num, den):
        if den == 0:
            return cls(1, 0)
        g = gcd(num, den)
        num, den = num // g, den // g
        if den < 0:
            num, den = -num, -den
        return cls(num, den)

    @classmethod
    def parse(cls, text):
        text = text.strip().strip("[]")
        if text in ("oo", "inf", "infinity", "1/0"):
            return cls(1, 0)
        f = Fraction(text)
        return cls(f.numerator, f.denominator)

    @property
    def is_infinity(self):
        return self.r == 0

    def __str__(self):
        if self.r == 0:
            return "oo"
        if self.r == 1:
            return str(self.s)
        return f"{self.s}/{self.r}"

    def value(self):
        return Fraction(self.s, self.r)


def _sl2_to_cusp(c):
    """A in SL2(Z) with A(oo) = c."""
    if c.r == 0:
        return IDENTITY
    g, x, y = _egcd(c.s, c.r)
    x, y = x * g, y * g
    # s*x + r*y = 1 -> [[s, -y], [r, x]]
    return Matrix2(c.s, -y, c.r, x)


def cusp_equivalent(c1, c2, N):
    """(True, M) with M in Gamma0(N), M(c2) = c1, or (False, None)."""
    A1 = _sl2_to_cusp(c1)
    A2 = _sl2_to_cusp(c2)
    A2i = A2.inverse()
    # lower-left of A1 T^h A2^-1 is q1 s2' - q2 s1' - h q1 q2
    q1, s1 = A1[2], A1[3]
    q2, s2 = A2[2], A2[3]
    rhs = q1 * s2 - q2 * s1
    m = q1 * q2
    g = gcd(m, N)
    if rhs % g:
        return False, None
    if m % N == 0:
        h = 0
    else:
        Ng = N // g
        h = (rhs // g) * pow((m // g) % Ng, -1, Ng) % Ng if Ng > 1 else 0
    M = A1 @ Matrix2(1, h, 0, 1) @ A2i
    assert M.in_gamma0(N) and M.act(c2) == c1
    return True, M


def cusp_count(N):
    return sum(euler_phi(gcd(d, N // d)) for d in divisors(N))


def cusp_list(N):
    """One representative s/r per Gamma0(N)-class, r | N, smallest s >= 1."""
    out = []
    for r in divisors(N):
        g = gcd(r, N // r)
        for u in range(g if g > 1 else 1):
            if g > 1 and gcd(u, g) != 1:
                continue
            s = u if u >= 1 else g
            while gcd(s, r) != 1:
                s += g
            out.append(Cusp(s, r))
    assert len(out) == cusp_count(N)
    return out


def cusp_class(c, N, reps=None):
    """The element of cusp_list(N) equivalent to c."""
    reps = reps or cusp_list(N)
    for rep in reps:
        if cusp_equivalent(rep, c, N)[0]:
            return rep
    raise AssertionError(f"cusp {c} matches no representative")


def cusp_width(c, N):
    if c.r == 0:
        return 1
    return N // gcd(c.r * c.r, N)


# -- fundamental domain ------------------------------------------------------

def reduce_to_fundamental_domain(tau, max_steps=10000):
    """(tau', M) with tau' = M tau in |Re| <= 1/2, |tau| >= 1, M in SL2(Z)."""
    tau = tau0 = mpmath.mpc(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    M = IDENTITY
    half = mpmath.mpf(1) / 2
    for _ in range(max_steps):
        n = int(mpmath.floor(tau.real + half))
        if n:
            tau -= n
            M = Matrix2(1, -n, 0, 1) @ M
        if abs(tau) < 1 - mpmath.mpf(2) ** (-mpmath.mp.prec + 10):
            tau = -1 / tau
            M = Matrix2(0, -1, 1, 0) @ M
        else:
            break
    # boundary conventions: Re = 1/2 -> -1/2; |tau| = 1 with Re > 0 -> reflect
    if tau.real >= half - mpmath.mpf(2) ** (-mpmath.mp.prec + 10):
        tau -= 1
        M = Matrix2(1, -1, 0, 1) @ M
    if abs(abs(tau) - 1) < mpmath.mpf(2) ** (-mpmath.mp.prec + 10) and tau.real > 0:
        tau = -1 / tau
        M = Matrix2(0, -1, 1, 0) @ M
    # one exact Moebius step from the input avoids accumulated rounding
    return M.act(tau0), M


def best_gamma0_translate(tau, N, cmax=None):
    """M in Gamma0(N) maximising Im(M tau) = Im tau / |c tau + d|^2."""
    tau = mpmath.mpc(tau)
    y = tau.imag
    if cmax is None:
        cmax = int(1 / (y * N)) + 1 if y * N < 1 else 1
    best = (mpmath.mpf(1), 0, 1)
    for k in range(1, cmax + 1):
        c = k * N
        d0 = int(mpmath.nint(-c * tau.real))
        for d in range(d0 - 2, d0 + 3):
            if gcd(c, d) != 1:
                continue
            v = abs(c * tau + d)
            if v < best[0]:
                best = (v, c, d)
    _, c, d = best
    if c == 0:
        return IDENTITY
    g, x, yy = _egcd(d, c)
    # a d - b c = 1
    return Matrix2(x * g, -yy * g, c, d)


def _stabilizer(z, tol):
    """Elements of SL2(Z)/{+-1} fixing a reduced point z (i and rho are special)."""
    out = [IDENTITY]
    if abs(z - 1j) < tol:
        out.append(Matrix2(0, -1, 1, 0))
    elif abs(z - mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)) < tol:
        st = Matrix2(0, -1, 1, 1)
        out += [st, st @ st]
    return out


def equivalent_points(t1, t2, N, tol=None):
    """M in Gamma0(N) with M t1 = t2 (numerically), or None."""
    tol = tol if tol is not None else mpmath.mpf(2) ** (-mpmath.mp.prec // 4)
    z1, g1 = reduce_to_fundamental_domain(t1)
    z2, g2 = reduce_to_fundamental_domain(t2)
    # boundary identifications of the reduced domain
    for fix in (IDENTITY, Matrix2(1, 1, 0, 1), Matrix2(1, -1, 0, 1), Matrix2(0, -1, 1, 0)):
        if abs(fix.act(z1) - z2) < tol * max(1, abs(z2)):
            break
    else:
        return None
    for S in _stabilizer(z1, tol):
        M = g2.inverse() @ fix @ S @ g1
        if M[2] % N == 0:
            if M[0] < 0 or (M[0] == 0 and M[1] < 0):
                M = Matrix2(*(-v for v in M))
            return M
    return None
