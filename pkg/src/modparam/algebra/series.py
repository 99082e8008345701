"""Truncated Laurent series in q with exact rational coefficients.

A series is stored as ``q^shift * sum(coeffs[i] * q^(valuation + i))`` and is
known modulo ``q^prec``.  ``shift`` is a rational exponent tag used only by the
generalized eta products; ordinary series have ``shift == 0``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm

from flint import fmpz_poly

INF = float("inf")


def _clean(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


def _as_int_lists(a, b):
    """Scale two coefficient lists to integers; return (A, B, denominator)."""
    da = lcm(*(c.denominator for c in a if isinstance(c, Fraction))) if a else 1
    db = lcm(*(c.denominator for c in b if isinstance(c, Fraction))) if b else 1
    A = [int(c * da) for c in a] if da != 1 else [int(c) for c in a]
    B = [int(c * db) for c in b] if db != 1 else [int(c) for c in b]
    return A, B, da * db


def mul_lists(a, b, n=None):
    """Exact product of coefficient lists, truncated to ``n`` terms."""
    if not a or not b:
        return []
    if n is None:
        n = len(a) + len(b) - 1
    n = min(n, len(a) + len(b) - 1)
    if n <= 0:
        return []
    A, B, den = _as_int_lists(a, b)
    if len(a) * len(b) < 64:
        out = [0] * n
        for i, x in enumerate(A[:n]):
            if x:
                for j, y in enumerate(B[: n - i]):
                    out[i + j] += x * y
    else:
        out = [int(c) for c in fmpz_poly(A).mul_low(fmpz_poly(B), n).coeffs()]
        out += [0] * (n - len(out))
    if den != 1:
        return [_clean(Fraction(c, den)) for c in out]
    return out


class LaurentSeries:
    """Immutable truncated Laurent series over Q."""

    __slots__ = ("valuation", "coeffs", "prec", "shift")

    def __init__(self, valuation, coeffs, prec=INF, shift=0):
        coeffs = [_clean(c) for c in coeffs]
        if prec != INF:
            coeffs = coeffs[: max(0, prec - valuation)]
        # strip leading zeros so the stored leading coefficient is nonzero
        k = 0
        while k < len(coeffs) and coeffs[k] == 0:
            k += 1
        valuation += k
        coeffs = coeffs[k:]
        if prec != INF:
            valuation = min(valuation, prec)
        else:
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
        self.valuation = valuation
        self.coeffs = tuple(coeffs)
        self.prec = prec
        self.shift = Fraction(shift)

    # -- construction -------------------------------------------------
    @classmethod
    def from_dict(cls, terms, prec=INF, shift=0):
        if not terms:
            return cls(prec if prec != INF else 0, [], prec, shift)
        v = min(terms)
        top = max(terms)
        c = [0] * (top - v + 1)
        for e, a in terms.items():
            c[e - v] = a
        return cls(v, c, prec, shift)

    @classmethod
    def constant(cls, a, prec=INF):
        return cls(0, [a], prec)

    @classmethod
    def monomial(cls, n, a=1, prec=INF):
        return cls(n, [a], prec)

    # -- access ---------------------------------------------------------
    def is_zero(self):
        return not any(self.coeffs)

    def __getitem__(self, n):
        if self.prec != INF and n >= self.prec:
            raise IndexError(f"coefficient q^{n} beyond precision {self.prec}")
        i = n - self.valuation
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    def coefficients(self, start, stop):
        """Coefficients of q^start .. q^(stop-1)."""
        return [self[n] for n in range(start, stop)]

    def leading_coefficient(self):
        return self.coeffs[0] if self.coeffs else 0

    def is_integral(self):
        return all(isinstance(c, int) for c in self.coeffs)

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs[:8]):
            if c:
                terms.append(f"{c}*q^{self.valuation + i}")
        s = " + ".join(terms) or "0"
        if self.shift:
            s = f"q^({self.shift})*({s})"
        return f"{s} + O(q^{self.prec})"

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if self.shift != other.shift:
            return False
        prec = min(self.prec, other.prec)
        lo = min(self.valuation, other.valuation)
        hi = prec if prec != INF else max(self.valuation + len(self.coeffs),
                                          other.valuation + len(other.coeffs))
        return all(self[n] == other[n] for n in range(lo, hi))

    __hash__ = None

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, LaurentSeries):
            return other
        return LaurentSeries.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        if self.shift != other.shift:
            raise ValueError("cannot add series with different exponent shifts")
        prec = min(self.prec, other.prec)
        v = min(self.valuation, other.valuation)
        top = max(self.valuation + len(self.coeffs), other.valuation + len(other.coeffs))
        if prec != INF:
            top = min(top, prec)
        out = [self._get0(n) + other._get0(n) for n in range(v, top)]
        return LaurentSeries(v, out, prec, self.shift)

    __radd__ = __add__

    def _get0(self, n):
        i = n - self.valuation
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    def __neg__(self):
        return LaurentSeries(self.valuation, [-c for c in self.coeffs], self.prec, self.shift)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, a):
        return LaurentSeries(self.valuation, [c * a for c in self.coeffs], self.prec, self.shift)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        v = self.valuation + other.valuation
        prec = min(self.prec + other.valuation, other.prec + self.valuation)
        n = None if prec == INF else max(0, prec - v)
        return LaurentSeries(v, mul_lists(list(self.coeffs), list(other.coeffs), n),
                             prec, self.shift + other.shift)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = LaurentSeries.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def truncate(self, prec):
        return LaurentSeries(self.valuation, list(self.coeffs), min(prec, self.prec), self.shift)

    def inverse(self):
        """Multiplicative inverse; requires a nonzero leading coefficient."""
        if self.is_zero():
            raise ZeroDivisionError("series is zero to its precision")
        if self.prec == INF:
            raise ValueError("inverse of an exact series needs a finite precision")
        n = self.prec - self.valuation  # relative precision
        a0 = self.coeffs[0]
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        inv0 = Fraction(1, 1) / a0
        out = [_clean(inv0)]
        # plain recurrence; Newton is not worth it at the sizes used here
        for k in range(1, n):
            s = 0
            for i in range(1, k + 1):
                if a[i]:
                    s += a[i] * out[k - i]
            out.append(_clean(-s * inv0))
        return LaurentSeries(-self.valuation, out, -self.valuation + n, -self.shift)

    def __truediv__(self, other):
        if isinstance(other, LaurentSeries):
            return self * other.inverse()
        return self.scale(Fraction(1) / other)

    def subs_qpow(self, N):
        """Substitute q -> q^N."""
        out = [0] * ((len(self.coeffs) - 1) * N + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            out[i * N] = c
        prec = self.prec * N if self.prec != INF else INF
        return LaurentSeries(self.valuation * N, out, prec, self.shift * N)

    def q_derivative(self):
        """q d/dq (ignores the shift tag's contribution)."""
        return LaurentSeries(self.valuation,
                             [(self.valuation + i) * c for i, c in enumerate(self.coeffs)],
                             self.prec, self.shift)

    def drop_shift(self):
        """Fold an integral exponent shift into the valuation."""
        if self.shift.denominator != 1:
            raise ValueError(f"exponent shift {self.shift} is not integral")
        s = int(self.shift)
        prec = self.prec + s if self.prec != INF else INF
        return LaurentSeries(self.valuation + s, list(self.coeffs), prec)

    def mod(self, p):
        """Coefficient list from the valuation up to prec, reduced mod p."""
        out = []
        for c in self.coeffs:
            if isinstance(c, Fraction):
                out.append(c.numerator * pow(c.denominator, -1, p) % p)
            else:
                out.append(c % p)
        if self.prec != INF:
            out += [0] * (self.prec - self.valuation - len(out))
        return out


# ---------------------------------------------------------------------------
# classical q-expansions


def _sigma_list(k, n):
    s = [0] * (n + 1)
    for d in range(1, n + 1):
        dk = d ** k
        for m in range(d, n + 1, d):
            s[m] += dk
    return s


def eisenstein_e4(n):
    """Integer coefficients of E4 = 1 + 240 sum sigma_3(m) q^m, m < n."""
    s = _sigma_list(3, n)
    return [1] + [240 * s[m] for m in range(1, n)]


def euler_product(n):
    """Coefficients of prod_{m>=1} (1 - q^m) below q^n (pentagonal numbers)."""
    out = [0] * n
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 >= n:
            break
        out[e1] += sign
        if k and e2 < n:
            out[e2] += sign
        k += 1
    return out


def _inverse_unit_series(a, n):
    """Inverse of an integer power series with constant term 1, n terms."""
    inv = fmpz_poly([1])
    f = fmpz_poly(a[:n])
    m = 1
    while m < n:
        m = min(2 * m, n)
        e = f.mul_low(inv, m)
        # inv <- inv * (2 - f*inv)
        two_minus = fmpz_poly([2]) - e
        inv = inv.mul_low(two_minus, m)
    out = [int(c) for c in inv.coeffs()]
    return out + [0] * (n - len(out))


@lru_cache(maxsize=8)
def _j_coeffs(n):
    e4 = fmpz_poly(eisenstein_e4(n))
    e4_cubed = e4.mul_low(e4, n).mul_low(e4, n)
    eta24 = fmpz_poly(euler_product(n)).pow_trunc(24, n)
    inv = fmpz_poly(_inverse_unit_series([int(c) for c in eta24.coeffs()], n))
    out = [int(c) for c in e4_cubed.mul_low(inv, n).coeffs()]
    return tuple(out + [0] * (n - len(out)))


def j_series(M):
    """The modular invariant j = 1/q + 744 + ... modulo q^(M+1)."""
    if M < 0:
        raise ValueError("precision M must be >= 0")
    # j*q = E4^3 / prod(1-q^n)^24 ; need coefficients of q^-1 .. q^M
    size = M + 2
    cached = _j_coeffs(max(size, 64))
    return LaurentSeries(-1, list(cached[:size]), M + 1)


def bernoulli2(t):
    t = Fraction(t)
    return t * t - t + Fraction(1, 6)


def generalized_eta_series(N, g, M):
    """Generalized eta function E_g for level N as a tagged series.

    The q-part is ``prod_{n>=1} (1 - q^(N(n-1)+g)) (1 - q^(Nn-g))`` modulo
    q^(M+1); the prefactor ``q^(N*B2(g/N)/2)`` is carried in ``shift``.
    """
    if not 1 <= g < N:
        raise ValueError(f"need 1 <= g < N, got g={g}, N={N}")
    if M < 0:
        raise ValueError("precision M must be >= 0")
    n_terms = M + 1
    poly = fmpz_poly([1])
    exps = []
    n = 1
    while True:
        e1 = N * (n - 1) + g
        e2 = N * n - g
        if e1 >= n_terms and e2 >= n_terms:
            break
        for e in (e1, e2):
            if e < n_terms:
                exps.append(e)
        n += 1
    for e in exps:
        factor = [0] * (e + 1)
        factor[0] = 1
        factor[e] = -1
        poly = poly.mul_low(fmpz_poly(factor), n_terms)
    coeffs = [int(c) for c in poly.coeffs()]
    coeffs += [0] * (n_terms - len(coeffs))
    shift = N * bernoulli2(Fraction(g, N)) / 2
    return LaurentSeries(0, coeffs, M + 1, shift)
