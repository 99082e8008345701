"""Elliptic curves over Q and the q-expansions attached to them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath
import numpy as np

from .algebra.series import LaurentSeries


class CurveError(ValueError):
    pass


def primes_up_to(n):
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def factorint(n):
    n = abs(n)
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def gamma0_index(N):
    """[SL2(Z) : Gamma0(N)] = N * prod_{p | N} (1 + 1/p)."""
    mu = N
    for p in factorint(N):
        mu = mu // p * (p + 1)
    return mu


@dataclass(frozen=True)
class EllipticCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with conductor N.

    The conductor is trusted input; the model is assumed minimal at every
    prime dividing N.
    """

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    N: int
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.N < 1:
            raise CurveError("conductor must be positive")
        if self.discriminant == 0:
            raise CurveError("singular Weierstrass model (discriminant 0)")

    @classmethod
    def from_list(cls, ainvs, N, label=""):
        return cls(*[int(a) for a in ainvs], int(N), label)

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self):
        return self.a1 ** 2 + 4 * self.a2

    @property
    def b4(self):
        return self.a1 * self.a3 + 2 * self.a4

    @property
    def b6(self):
        return self.a3 ** 2 + 4 * self.a6

    @property
    def b8(self):
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self):
        return self.b2 ** 2 - 24 * self.b4

    @property
    def c6(self):
        return -self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self):
        return Fraction(self.c4 ** 3, self.discriminant)

    def equation(self, x, y):
        """Left minus right side of the Weierstrass equation."""
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)

    def is_on_curve(self, x, y):
        return self.equation(x, y) == 0

    def __str__(self):
        return self.label or f"[{','.join(map(str, self.ainvs))}] N={self.N}"

    # -- local data -----------------------------------------------------
    def count_points(self, p):
        """#E(F_p) of the reduced model, singular point included."""
        if p == 2:
            a1, a2, a3, a4, a6 = (a % 2 for a in self.ainvs)
            n = 1
            for x in range(2):
                for y in range(2):
                    if (y * y + a1 * x * y + a3 * y - x ** 3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                        n += 1
            return n
        x = np.arange(p, dtype=np.int64)
        # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6; Horner stays below 2^63 for p < 10^6
        b2, b4, b6 = self.b2 % p, self.b4 % p, self.b6 % p
        if p < 10 ** 6:
            g = (((4 * x + b2) * x + 2 * b4) * x + b6) % p
        else:
            g = (((4 * x + b2) % p) * x % p + 2 * b4) % p
            g = (g * x + b6) % p
        chi = _legendre_table(p)
        return int(p + 1 + chi[g].sum())

    def reduction_type(self, p):
        """'good', 'split', 'nonsplit' or 'additive' at the prime p."""
        if self.discriminant % p:
            return "good"
        if self.c4 % p == 0:
            return "additive"
        a = p + 1 - self.count_points(p)
        return "split" if a == 1 else "nonsplit"


_LEGENDRE_CACHE = {}


def _legendre_table(p):
    t = _LEGENDRE_CACHE.get(p)
    if t is None:
        x = np.arange(1, (p + 1) // 2, dtype=np.int64)
        t = np.full(p, -1, dtype=np.int64)
        t[x * x % p] = 1
        t[0] = 0
        if len(_LEGENDRE_CACHE) > 64:
            _LEGENDRE_CACHE.clear()
        _LEGENDRE_CACHE[p] = t
    return t


def ap_point_count(E, p):
    """a_p = p + 1 - #E(F_p); gives 0/+1/-1 at additive/split/nonsplit primes."""
    return p + 1 - E.count_points(p)


_AN_CACHE = {}


def an_sequence(E, M):
    """Coefficients [a_0=0, a_1, ..., a_M] of the newform attached to E."""
    if M < 1:
        raise ValueError("M must be >= 1")
    key = E.ainvs
    cached = _AN_CACHE.get(key)
    if cached is not None and len(cached) > M:
        return cached[: M + 1]
    want = M
    if cached is not None:
        # grow geometrically so repeated requests stay linear overall
        M = max(M, 2 * (len(cached) - 1))
    a = [0] * (M + 1)
    a[1] = 1
    spf = list(range(M + 1))
    for p in primes_up_to(int(M ** 0.5) + 1):
        for m in range(p * p, M + 1, p):
            if spf[m] == m:
                spf[m] = p
    for p in primes_up_to(M):
        ap = cached[p] if cached is not None and p < len(cached) else ap_point_count(E, p)
        a[p] = ap
        bad = E.N % p == 0
        prev2, prev, pk = 1, ap, p
        while pk * p <= M:
            pk *= p
            cur = ap * prev if bad else ap * prev - p * prev2
            a[pk] = cur
            prev2, prev = prev, cur
    for n in range(2, M + 1):
        p = spf[n]
        if p == n:
            continue
        m, pk = n, 1
        while m % p == 0:
            m //= p
            pk *= p
        if m > 1:
            a[n] = a[pk] * a[m]
    if E.N and len(_AN_CACHE) < 32:
        _AN_CACHE[key] = a
    return a[: want + 1]


def newform_series(E, M):
    """f = sum a_n q^n modulo q^(M+1)."""
    a = an_sequence(E, M)
    return LaurentSeries(0, a, M + 1)


@dataclass(frozen=True)
class TaniyamaSeries:
    xq: LaurentSeries
    yq: LaurentSeries


def taniyama_series(E, M):
    """x(q), y(q) with x = q^-2 + ..., y = -q^-3 + ..., x known mod q^M.

    x is the unique solution with leading term q^-2 of
    (q dx/dq)^2 = f^2 (4x^3 + b2 x^2 + 2 b4 x + b6); then
    y = (q dx/dq / f - a1 x - a3) / 2.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    n = M + 2  # number of x coefficients, exponents -2 .. M-1
    a = an_sequence(E, n + 2)
    f = [gmpy2.mpz(c) for c in a[1:]]  # f[k] <-> q^(k+1)
    mpq = gmpy2.mpq
    # f2[k] <-> q^(k+2)
    f2 = [sum(f[i] * f[k - i] for i in range(k + 1)) for k in range(n)]
    b2, b4, b6 = E.b2, E.b4, E.b6
    t = [mpq(1)] + [mpq(0)] * (n - 1)   # x = sum t_i q^(i-2)
    x2 = [mpq(0)] * n                   # x^2 = sum x2_i q^(i-4)
    x3 = [mpq(0)] * n                   # x^3 = sum x3_i q^(i-6)
    dx2 = [mpq(0)] * n                  # (q x')^2 = sum dx2_i q^(i-4)
    P = [mpq(0)] * n                    # 4x^3+b2 x^2+2 b4 x+b6 = sum P_i q^(i-6)
    x2[0] = mpq(1)
    x3[0] = mpq(1)
    dx2[0] = mpq(4)

    def fill_P(i):
        v = 4 * x3[i]
        if i >= 2:
            v += b2 * x2[i - 2]
        if i >= 4:
            v += 2 * b4 * t[i - 4]
        if i == 6:
            v += b6
        P[i] = v

    fill_P(0)
    for i in range(1, n):
        # contributions with t_i = 0
        s2 = sum(t[k] * t[i - k] for k in range(1, i))
        x2[i] = s2
        x3[i] = sum(x2[k] * t[i - k] for k in range(0, i + 1))
        dx2[i] = sum((k - 2) * (i - k - 2) * t[k] * t[i - k] for k in range(1, i))
        fill_P(i)
        rhs = sum(f2[k] * P[i - k] for k in range(0, i + 1))
        ti = (dx2[i] - rhs) / (4 * i + 4)
        t[i] = ti
        x2[i] += 2 * ti
        x3[i] += 3 * ti
        dx2[i] += -4 * (i - 2) * ti
        P[i] += 12 * ti
    coeffs = [_to_exact(c) for c in t]
    xq = LaurentSeries(-2, coeffs, M)
    fs = newform_series(E, M + 4)
    # y = (q x' / f - a1 x - a3)/2 ; q x'/f has valuation -3
    dx = xq.q_derivative()
    yq = (dx * fs.inverse() - xq.scale(E.a1) - E.a3).scale(Fraction(1, 2))
    yq = yq.truncate(M - 1)
    return TaniyamaSeries(xq, yq)


def _to_exact(c):
    if c.denominator == 1:
        return int(c.numerator)
    return Fraction(int(c.numerator), int(c.denominator))


@dataclass(frozen=True)
class LValue:
    value: mpmath.mpf
    error: mpmath.mpf
    root_number: int
    terms: int


def root_number(E, dps=30):
    """Sign w of the functional equation, found numerically from f."""
    N = E.N
    with mpmath.workdps(dps):
        y = mpmath.mpf(1.1) / mpmath.sqrt(N)
        # f|W_N = -w f, so f(i/(N y)) = w N y^2 f(i y)
        t = int(60 * mpmath.sqrt(N) / (2 * mpmath.pi * 1.1 / 1.1 ** 2)) + 50
        a = an_sequence(E, t)

        def f_imag(yy):
            q = mpmath.exp(-2 * mpmath.pi * yy)
            return mpmath.fsum(a[n] * q ** n for n in range(1, t + 1))

        ratio = f_imag(1 / (N * y)) / (N * y * y * f_imag(y))
        w = int(mpmath.nint(ratio))
        if w not in (1, -1) or abs(ratio - w) > mpmath.mpf(10) ** (-dps // 2):
            raise CurveError(f"could not determine the root number (ratio {ratio})")
    return w


def l_value_at_1(E, bits=128):
    """L(E,1) = (1 + w) sum_n a_n/n exp(-2 pi n / sqrt(N)) with a tail bound."""
    w = root_number(E)
    with mpmath.workprec(bits + 20):
        c = 2 * mpmath.pi / mpmath.sqrt(E.N)
        eps = mpmath.mpf(2) ** (-bits)
        # tail bound with |a_n| <= n: sum_{n>T} exp(-c n) = e^{-c(T+1)}/(1-e^{-c})
        T = int((bits * mpmath.log(2) - mpmath.log(1 - mpmath.exp(-c))) / c) + 1
        a = an_sequence(E, T)
        r = mpmath.exp(-c)
        s = mpmath.mpf(0)
        rn = mpmath.mpf(1)
        for n in range(1, T + 1):
            rn *= r
            if a[n]:
                s += mpmath.mpf(a[n]) / n * rn
        tail = mpmath.exp(-c * (T + 1)) / (1 - r)
        value = (1 + w) * s
        err = (1 + w) * tail
    return LValue(value, max(err, eps) if w == 1 else mpmath.mpf(0), w, T)
