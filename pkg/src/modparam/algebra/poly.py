"""Dense integer polynomials in one and two variables.

Univariate polynomials are stored as ascending integer tuples and use
flint's fmpz_poly for multiplication and gcd.  The resultant is our own
subresultant remainder sequence over Z[x][y].
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

import flint


def _fz(coeffs):
    return flint.fmpz_poly([int(c) for c in coeffs])


def _coeffs(p):
    return tuple(int(c) for c in p.coeffs())


class UnivariatePolynomial:
    """Immutable polynomial with integer coefficients, ascending order."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs=(), var="x"):
        c = [int(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)
        self.var = var

    @classmethod
    def from_rationals(cls, coeffs, var="x"):
        """Scale rational coefficients to a primitive integer polynomial."""
        fr = [Fraction(c) for c in coeffs]
        den = lcm(*[f.denominator for f in fr]) if fr else 1
        return cls([f * den for f in fr], var).primitive()

    @classmethod
    def from_flint(cls, p, var="x"):
        return cls(_coeffs(p), var)

    def to_flint(self):
        return _fz(self.coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    @property
    def leading_coefficient(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __eq__(self, other):
        if isinstance(other, int):
            return self.coeffs == ((other,) if other else ())
        return isinstance(other, UnivariatePolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_upoly(other, self.var)
        n = max(len(self.coeffs), len(other.coeffs))
        return UnivariatePolynomial([self[i] + other[i] for i in range(n)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return UnivariatePolynomial([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-_as_upoly(other, self.var))

    def __rsub__(self, other):
        return _as_upoly(other, self.var) - self

    def __mul__(self, other):
        other = _as_upoly(other, self.var)
        return UnivariatePolynomial.from_flint(self.to_flint() * other.to_flint(), self.var)

    __rmul__ = __mul__

    def __pow__(self, e):
        return UnivariatePolynomial.from_flint(self.to_flint() ** e, self.var)

    def divmod_exact(self, other):
        q, r = divmod(self.to_flint(), _as_upoly(other).to_flint())
        return UnivariatePolynomial.from_flint(q, self.var), UnivariatePolynomial.from_flint(r, self.var)

    def divides(self, other):
        """True if self divides other in Q[x] (and in Z[x] for primitive self)."""
        if self.is_zero():
            return other.is_zero()
        _, r = divmod(other.to_flint(), self.to_flint())
        return r == 0

    def derivative(self):
        return UnivariatePolynomial([k * c for k, c in enumerate(self.coeffs)][1:], self.var)

    def content(self):
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g

    def primitive(self):
        """Content 1 and positive leading coefficient."""
        if not self.coeffs:
            return self
        g = self.content()
        if self.coeffs[-1] < 0:
            g = -g
        return UnivariatePolynomial([c // g for c in self.coeffs], self.var)

    def __repr__(self):
        return f"UnivariatePolynomial({list(self.coeffs)})"

    def __str__(self):
        return format_univariate(self.coeffs, self.var)


def _as_upoly(p, var="x"):
    if isinstance(p, UnivariatePolynomial):
        return p
    if isinstance(p, int):
        return UnivariatePolynomial([p], var)
    if isinstance(p, flint.fmpz_poly):
        return UnivariatePolynomial.from_flint(p, var)
    return UnivariatePolynomial(p, var)


def format_univariate(coeffs, var="x"):
    """Descending order with unit coefficients suppressed: 23*x^4 - 70*x^3 + ... + 3184."""
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mon = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mon:
            terms.append(str(c))
        elif c == 1:
            terms.append(mon)
        elif c == -1:
            terms.append(f"-{mon}")
        else:
            terms.append(f"{c}*{mon}")
    if not terms:
        return "0"
    return " + ".join(terms).replace("+ -", "- ")


def poly_gcd(P, Q):
    """Primitive integer gcd with positive leading coefficient."""
    P, Q = _as_upoly(P), _as_upoly(Q)
    if P.is_zero() and Q.is_zero():
        raise ValueError("gcd of two zero polynomials")
    g = P.to_flint().gcd(Q.to_flint())
    return UnivariatePolynomial.from_flint(g, P.var).primitive()


def squarefree_part(P):
    """P / gcd(P, P') in primitive integer form."""
    P = _as_upoly(P)
    if P.is_zero():
        raise ValueError("squarefree part of the zero polynomial")
    if P.degree == 0:
        return UnivariatePolynomial([1], P.var)
    g = poly_gcd(P, P.derivative())
    q, r = P.divmod_exact(g)
    assert r.is_zero()
    return q.primitive()


def squarefree_decomposition(P):
    """Yun's algorithm: list of (factor, multiplicity) with primitive factors."""
    P = _as_upoly(P).primitive()
    if P.degree <= 0:
        return []
    out = []
    f = P.to_flint()
    a = f.gcd(f.derivative())
    b = _exact_div(f, a)
    c = _exact_div(f.derivative(), a)
    d = c - b.derivative()
    i = 1
    while b.degree() > 0:
        a = b.gcd(d)
        b = _exact_div(b, a)
        c = _exact_div(d, a)
        d = c - b.derivative()
        if a.degree() > 0:
            out.append((UnivariatePolynomial.from_flint(a, P.var).primitive(), i))
        i += 1
    return out


def _exact_div(a, b):
    q, r = divmod(a, b)
    if r != 0:
        raise ArithmeticError("inexact polynomial division")
    return q


class BivariatePolynomial:
    """Dense integer polynomial sum c[k][l] u^k v^l, 0 <= k <= K, 0 <= l <= L."""

    __slots__ = ("grid", "names")

    def __init__(self, grid, names=("x", "j")):
        rows = [[int(c) for c in row] for row in grid]
        width = max((len(r) for r in rows), default=0)
        rows = [r + [0] * (width - len(r)) for r in rows]
        while rows and not any(rows[-1]):
            rows.pop()
        while rows and width and not any(r[width - 1] for r in rows):
            width -= 1
            rows = [r[:width] for r in rows]
        self.grid = tuple(tuple(r) for r in rows)
        self.names = tuple(names)

    @classmethod
    def from_dict(cls, d, names=("x", "j")):
        if not d:
            return cls([], names)
        K = max(k for k, _ in d)
        L = max(l for _, l in d)
        g = [[0] * (L + 1) for _ in range(K + 1)]
        for (k, l), c in d.items():
            g[k][l] += c
        return cls(g, names)

    @classmethod
    def from_vector(cls, vec, K, L, names=("x", "j")):
        """Coefficient vector ordered by k major, l minor."""
        g = [[vec[k * (L + 1) + l] for l in range(L + 1)] for k in range(K + 1)]
        return cls(g, names)

    @property
    def degree_first(self):
        return len(self.grid) - 1

    @property
    def degree_second(self):
        return len(self.grid[0]) - 1 if self.grid else -1

    @property
    def degrees(self):
        return self.degree_first, self.degree_second

    def is_zero(self):
        return not self.grid

    def coeff(self, k, l):
        if 0 <= k < len(self.grid) and 0 <= l < len(self.grid[0]):
            return self.grid[k][l]
        return 0

    def items(self):
        for k, row in enumerate(self.grid):
            for l, c in enumerate(row):
                if c:
                    yield (k, l), c

    def to_dict(self):
        return dict(self.items())

    def __eq__(self, other):
        return isinstance(other, BivariatePolynomial) and self.grid == other.grid

    def __hash__(self):
        return hash(self.grid)

    def __repr__(self):
        return f"BivariatePolynomial({self.to_dict()})"

    def content(self):
        g = 0
        for _, c in self.items():
            g = gcd(g, c)
        return g

    def normalize(self):
        """Content 1, and the top corner (or first nonzero from the top) positive."""
        if self.is_zero():
            return self
        g = self.content()
        K, L = self.degrees
        lead = 0
        for k in range(K, -1, -1):
            for l in range(L, -1, -1):
                if self.grid[k][l]:
                    lead = self.grid[k][l]
                    break
            if lead:
                break
        if lead < 0:
            g = -g
        return BivariatePolynomial([[c // g for c in row] for row in self.grid], self.names)

    def is_normalized(self):
        return self == self.normalize()

    def swap(self):
        K, L = self.degrees
        return BivariatePolynomial(
            [[self.grid[k][l] for k in range(K + 1)] for l in range(L + 1)],
            self.names[::-1])

    def coefficients_in(self, var):
        """Coefficients as polynomials in the other variable.

        var="second" returns [A_0(u), ..., A_L(u)] with P = sum A_l(u) v^l.
        """
        P = self if var in ("second", 1, self.names[1]) else self.swap()
        K, L = P.degrees
        other = P.names[0]
        return [UnivariatePolynomial([P.grid[k][l] for k in range(K + 1)], other)
                for l in range(L + 1)]

    def leading_coefficient_in(self, var):
        return self.coefficients_in(var)[-1]

    def derivative(self, var):
        """Partial derivative with respect to 'first' or 'second'."""
        if var in ("first", 0, self.names[0]):
            return BivariatePolynomial(
                [[k * c for c in row] for k, row in enumerate(self.grid)][1:] or [], self.names)
        return BivariatePolynomial(
            [[l * c for l, c in enumerate(row)][1:] for row in self.grid], self.names)

    def specialize_first(self, u):
        """P(u, v) as a list of coefficients in v (values of the type of u)."""
        K, L = self.degrees
        out = []
        for l in range(L + 1):
            acc = 0 * u
            for k in range(K, -1, -1):
                acc = acc * u + self.grid[k][l]
            out.append(acc)
        return out

    def specialize_second(self, v):
        return self.swap().specialize_first(v)

    def __call__(self, u, v):
        acc = 0 * u * v
        for k in range(self.degree_first, -1, -1):
            row = self.grid[k]
            inner = 0 * v
            for c in reversed(row):
                inner = inner * v + c
            acc = acc * u + inner
        return acc

    def __str__(self):
        u, v = self.names
        terms = []
        for (k, l), c in sorted(self.items()):
            mon = "*".join(s for s in (
                "" if k == 0 else (u if k == 1 else f"{u}^{k}"),
                "" if l == 0 else (v if l == 1 else f"{v}^{l}")) if s)
            terms.append(f"{c}*{mon}" if mon else str(c))
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


# -- resultants ----------------------------------------------------------

def _prem(A, B):
    """Pseudo-remainder lc(B)^(deg A - deg B + 1) A mod B over Z[x][y].

    Polynomials in y are lists of fmpz_poly coefficients, ascending.
    """
    dA, dB = len(A) - 1, len(B) - 1
    lb = B[-1]
    R = list(A)
    e = dA - dB + 1
    while len(R) - 1 >= dB and R:
        dR = len(R) - 1
        lr = R[-1]
        shift = dR - dB
        R = [c * lb for c in R]
        for i in range(dB + 1):
            R[i + shift] -= lr * B[i]
        R.pop()
        e -= 1
        while R and R[-1] == 0:
            R.pop()
    if e > 0:
        f = lb ** e
        R = [c * f for c in R]
    return R


def _subresultant(A, B):
    """Resultant of A, B in R[y], R = Z[x], Sylvester convention (A rows first)."""
    zero = flint.fmpz_poly(0)
    if not A or not B:
        return zero
    dA, dB = len(A) - 1, len(B) - 1
    s = 1
    if dA < dB:
        A, B = B, A
        dA, dB = dB, dA
        if dA % 2 == 1 and dB % 2 == 1:
            s = -s
    if dB == 0:
        return B[0] ** dA * s
    g = flint.fmpz_poly(1)
    h = flint.fmpz_poly(1)
    while True:
        dA, dB = len(A) - 1, len(B) - 1
        delta = dA - dB
        if dA % 2 == 1 and dB % 2 == 1:
            s = -s
        R = _prem(A, B)
        A = B
        div = g * h ** delta
        B = [_exact_div(c, div) for c in R]
        g = A[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = _exact_div(g ** delta, h ** (delta - 1))
        if not B:
            return zero
        if len(B) == 1:
            break
    dA = len(A) - 1
    lb = B[0]
    if dA == 0:
        h = flint.fmpz_poly(1)
    elif dA == 1:
        h = lb
    else:
        h = _exact_div(lb ** dA, h ** (dA - 1))
    return h * s


def resultant(P, Q, var="second"):
    """Res_var(P, Q) as a univariate polynomial in the remaining variable."""
    if P.is_zero() or Q.is_zero():
        raise ValueError("resultant of a zero polynomial")
    A = [c.to_flint() for c in P.coefficients_in(var)]
    B = [c.to_flint() for c in Q.coefficients_in(var)]
    other = P.names[0] if var in ("second", 1, P.names[1]) else P.names[1]
    return UnivariatePolynomial.from_flint(_subresultant(A, B), other)


def univariate_resultant(P, Q):
    """Resultant of two univariate integer polynomials (an integer)."""
    A = [flint.fmpz_poly([c]) for c in _as_upoly(P).coeffs]
    B = [flint.fmpz_poly([c]) for c in _as_upoly(Q).coeffs]
    r = _subresultant(A, B)
    return int(r[0]) if r != 0 else 0
