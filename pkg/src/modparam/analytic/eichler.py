"""The Eichler integral gamma(tau) = sum a_n/n q^n, matrix periods, and phi."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath
import numpy as np

from ..curve import an_sequence, ap_point_count, primes_up_to
from .lattice import LatticePole, periods, weierstrass_p, weierstrass_p_prime
from .modular import IDENTITY, Cusp, Matrix2, _egcd, best_gamma0_translate, cusp_equivalent

log = logging.getLogger(__name__)

_GUARD = 24
# coordinates of matrix periods can exceed the generic snapping box
_PERIOD_BOUND = 10 ** 6


@dataclass(frozen=True)
class CurvePoint:
    """A point (x, y) of E, or the point at infinity when x is None."""

    x: mpmath.mpc | None = None
    y: mpmath.mpc | None = None

    @property
    def is_infinity(self):
        return self.x is None

    def __str__(self):
        if self.is_infinity:
            return "oo"
        return f"({mpmath.nstr(self.x, 15)}, {mpmath.nstr(self.y, 15)})"


INFINITY = CurvePoint()

_LATTICES = {}


def lattice(E, bits=256):
    key = (E.ainvs, bits)
    if key not in _LATTICES:
        _LATTICES[key] = periods(E, bits)
    return _LATTICES[key]


def _terms_needed(im_tau, bits):
    # |a_n / n| <= d(n)/sqrt(n) < 1, so the tail after n terms is below |q|^n / (1 - |q|)
    return int(bits * 0.6931471805599453 / (2 * 3.141592653589793 * float(im_tau))) + 10


def _gamma_series(E, tau, bits):
    n = _terms_needed(tau.imag, bits)
    a = an_sequence(E, n + 1)
    with mpmath.workprec(bits + _GUARD):
        q = mpmath.expjpi(2 * tau)
        total = mpmath.mpc(0)
        qn = mpmath.mpc(1)
        for k in range(1, n + 1):
            qn *= q
            if a[k]:
                total += qn * a[k] / k
    return total


def _gamma_series_double(E, tau):
    """gamma(tau) to about 1e-11 by direct summation."""
    tau = complex(tau)
    n = _terms_needed(tau.imag, 36)
    a = np.array(an_sequence(E, n + 1)[1:n + 1], dtype=float)
    k = np.arange(1, n + 1)
    return complex(np.sum(a / k * np.exp(2j * np.pi * k * tau)))


def _best_translate_below(tau, N, cbound):
    """M in Gamma0(N) with 0 < c < cbound maximising Im(M tau), or None."""
    best, arg = abs(tau.imag), None
    for c in range(N, cbound, N):
        d0 = round(-c * tau.real)
        for d in range(d0 - 1, d0 + 2):
            if gcd(c, d) != 1:
                continue
            im = tau.imag / abs(c * tau + d) ** 2
            if im > best:
                best, arg = im, (c, d)
    if arg is None:
        return None
    c, d = arg
    g, x, y = _egcd(d, c)
    return Matrix2(x * g, -y * g, c, d)


class _PeriodLocator:
    """Double-precision periods, evaluated by recursive translation.

    P(M) = gamma(M t0) - gamma(t0) with Im t0 = 1/c would need O(c) terms;
    instead gamma at t0 and M t0 is computed as gamma(M' t) - P(M') for a
    translate M' with smaller lower-left entry, recursively.
    """

    def __init__(self, E, L):
        self.E = E
        self.N = E.N
        self.w1, self.w2 = complex(L.w1), complex(L.w2)
        self.cache = {}
        # direct summation is cheap below this lower-left entry
        self.direct = 4 * self.N

    def snap(self, val):
        w1, w2 = self.w1, self.w2
        m = (val * w2.conjugate()).imag / (w1 * w2.conjugate()).imag
        n = (w1.conjugate() * val).imag / (w1.conjugate() * w2).imag
        mi, ni = round(m), round(n)
        if abs(mi) > _PERIOD_BOUND or abs(ni) > _PERIOD_BOUND:
            return None
        if abs(val - (mi * w1 + ni * w2)) > 1e-6 * max(1.0, abs(w1)):
            return None
        return mi, ni

    def gamma(self, tau, cbound):
        if tau.imag * self.N < 0.25 and cbound > self.N:
            M = _best_translate_below(tau, self.N, cbound)
            if M is not None:
                P = self.period(M)
                if P is not None:
                    m, n = P
                    return self.gamma(M.act(tau), M[2]) - (m * self.w1 + n * self.w2)
        return _gamma_series_double(self.E, tau)

    def period(self, M):
        if M[2] < 0:
            M = Matrix2(*(-v for v in M))
        a, b, c, d = M
        if c == 0:
            return 0, 0
        if M in self.cache:
            return self.cache[M]
        tau0 = complex(-d, 1) / c
        if c <= self.direct:
            val = _gamma_series_double(self.E, M.act(tau0)) - _gamma_series_double(self.E, tau0)
        else:
            val = self.gamma(M.act(tau0), c) - self.gamma(tau0, c)
        out = self.cache[M] = self.snap(val)
        return out


_LOCATORS = {}


def period_coordinates(E, M, bits=256):
    """(m, n) with P_f(M) = m w1 + n w2, or None when the value does not snap."""
    M = Matrix2(*M)
    if not M.in_gamma0(E.N):
        raise ValueError(f"{M} is not in Gamma0({E.N})")
    key = E.ainvs
    if key not in _LOCATORS:
        _LOCATORS[key] = _PeriodLocator(E, lattice(E, bits))
    return _LOCATORS[key].period(M)


def _raw_period(E, M, bits):
    if M[2] < 0:
        M = Matrix2(*(-v for v in M))
    a, b, c, d = M
    with mpmath.workprec(bits + _GUARD):
        tau0 = mpmath.mpc(-d, 1) / c
        return _gamma_series(E, M.act(tau0), bits) - _gamma_series(E, tau0, bits)


def period_of_matrix(E, M, bits=256):
    """P_f(M) = gamma(M tau) - gamma(tau), snapped to the period lattice."""
    M = Matrix2(*M)
    coords = period_coordinates(E, M, bits)
    if coords is None:
        log.warning("period of %s does not snap to the lattice; returning the raw value", M)
        return _raw_period(E, M, bits)
    L = lattice(E, bits)
    with mpmath.workprec(bits + _GUARD):
        return L.point(*coords)


def eichler_gamma(E, tau, bits=256):
    """gamma(tau) for tau in the upper half-plane."""
    with mpmath.workprec(bits + _GUARD):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        if tau.imag >= mpmath.mpf(1) / (10 * E.N):
            return _gamma_series(E, tau, bits)
        M = best_gamma0_translate(tau, E.N)
        if M == IDENTITY:
            log.warning("no Gamma0(%d) translate raises Im tau = %s", E.N, mpmath.nstr(tau.imag, 5))
            return _gamma_series(E, tau, bits)
        # gamma(M tau) = gamma(tau) + P_f(M)
        return _gamma_series(E, M.act(tau), bits) - period_of_matrix(E, M, bits)


# -- cusps --------------------------------------------------------------------

def _hecke_images(c):
    """The p + 1 cusps (s + j r)/(p r), j < p, and p s / r, as a function of p."""
    def images(p):
        out = [Cusp.from_pair(c.s + j * c.r, p * c.r) for j in range(p)]
        out.append(Cusp.from_pair(p * c.s, c.r))
        return out
    return images


def _auxiliary_prime(c, N, limit=2000):
    """Smallest p not dividing N with every Hecke image of c equivalent to c."""
    images = _hecke_images(c)
    for p in primes_up_to(limit):
        if N % p == 0:
            continue
        mats = []
        for beta in images(p):
            ok, M = cusp_equivalent(c, beta, N)
            if not ok:
                break
            mats.append(M)
        else:
            return p, mats
    raise ArithmeticError(f"no auxiliary prime below {limit} for the cusp {c}")


def gamma_at_cusp_coordinates(E, c, bits=256):
    """Exact (m, n) in Q^2 with gamma(c) = m w1 + n w2, or None if a period fails to snap."""
    if isinstance(c, str):
        c = Cusp.parse(c)
    if c.is_infinity:
        return Fraction(0), Fraction(0)
    p, mats = _auxiliary_prime(c, E.N)
    # sum_j gamma(beta_j) = a_p gamma(c) and gamma(beta_j) = gamma(c) - P_f(M_j)
    den = p + 1 - ap_point_count(E, p)
    m = n = 0
    for M in mats:
        coords = period_coordinates(E, M, bits)
        if coords is None:
            return None
        m += coords[0]
        n += coords[1]
    return Fraction(m, den), Fraction(n, den)


def gamma_at_cusp(E, c, bits=256):
    """gamma(s/r) as a complex number, exact up to the precision of the periods."""
    if isinstance(c, str):
        c = Cusp.parse(c)
    if c.is_infinity:
        return mpmath.mpc(0)
    coords = gamma_at_cusp_coordinates(E, c, bits)
    L = lattice(E, bits)
    with mpmath.workprec(bits + _GUARD):
        if coords is not None:
            return L.point(mpmath.mpf(coords[0].numerator) / coords[0].denominator,
                           mpmath.mpf(coords[1].numerator) / coords[1].denominator)
        p, mats = _auxiliary_prime(c, E.N)
        den = p + 1 - ap_point_count(E, p)
        return mpmath.fsum(period_of_matrix(E, M, bits) for M in mats) / den


# -- the modular parametrization -------------------------------------------------

def point_from_z(E, z, bits=256):
    """(x, y) = (p(z) - b2/12, (p'(z) - a1 x - a3)/2), or INFINITY for z in the lattice."""
    L = lattice(E, bits)
    if L.contains(z, mpmath.mpf(2) ** (-bits // 4)):
        return INFINITY
    with mpmath.workprec(bits + _GUARD):
        try:
            wp = weierstrass_p(z, L, bits)
            dwp = weierstrass_p_prime(z, L, bits)
        except LatticePole:
            return INFINITY
        x = wp - mpmath.mpf(E.b2) / 12
        y = (dwp - E.a1 * x - E.a3) / 2
    return CurvePoint(x, y)


def phi_eval(E, tau, bits=256):
    """phi([tau]) for tau in the upper half-plane or a cusp."""
    if isinstance(tau, Cusp):
        z = gamma_at_cusp(E, tau, bits)
    else:
        z = eichler_gamma(E, tau, bits)
    return point_from_z(E, z, bits)
