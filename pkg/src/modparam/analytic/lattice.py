"""Period lattice of E and the Weierstrass functions attached to it."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .modular import reduce_to_fundamental_domain

_GUARD = 24


class LatticePole(ArithmeticError):
    """The argument of the Weierstrass function lies on the lattice."""


@dataclass(frozen=True)
class PeriodLattice:
    """Periods w1 (real, positive for real curves) and w2; w2/w1 is not real."""

    w1: mpmath.mpc
    w2: mpmath.mpc
    bits: int

    @property
    def tau(self):
        """w2/w1 or its negative, whichever lies in the upper half-plane."""
        t = self.w2 / self.w1
        return t if t.imag > 0 else -t

    def coordinates(self, z):
        """Real (m, n) with z = m w1 + n w2."""
        w1, w2 = self.w1, self.w2
        det = (w1.conjugate() * w2).imag
        m = (z * w2.conjugate()).imag / (w1 * w2.conjugate()).imag
        n = (w1.conjugate() * z).imag / det
        return m, n

    def point(self, m, n):
        return m * self.w1 + n * self.w2

    def snap(self, z, tol=None, bound=64):
        """Nearest lattice point (m, n) if within tol, else None."""
        tol = tol if tol is not None else mpmath.mpf(2) ** (-self.bits // 4)
        m, n = self.coordinates(z)
        mi, ni = int(mpmath.nint(m)), int(mpmath.nint(n))
        if abs(mi) > bound or abs(ni) > bound:
            return None
        if abs(z - self.point(mi, ni)) <= tol:
            return mi, ni
        return None

    def snap_rational(self, z, den, tol=None, bound=64):
        """(m, n) in (1/den)Z^2 with z = m w1 + n w2, as Fractions."""
        tol = tol if tol is not None else mpmath.mpf(2) ** (-self.bits // 4)
        m, n = self.coordinates(z)
        mi, ni = int(mpmath.nint(m * den)), int(mpmath.nint(n * den))
        if abs(mi) > bound * den or abs(ni) > bound * den:
            return None
        if abs(z - self.point(mpmath.mpf(mi) / den, mpmath.mpf(ni) / den)) <= tol:
            return Fraction(mi, den), Fraction(ni, den)
        return None

    def contains(self, z, tol=None):
        return self.snap(z, tol) is not None


def _cubic_roots(E):
    """Roots of 4x^3 + b2 x^2 + 2 b4 x + b6 (the x-coordinates of 2-torsion)."""
    return mpmath.polyroots([4, E.b2, 2 * E.b4, E.b6], maxsteps=400,
                            extraprec=2 * mpmath.mp.prec)


def periods(E, bits=256):
    """Period lattice of the invariant differential dx/(2y + a1 x + a3), by AGM."""
    with mpmath.workprec(bits + _GUARD):
        roots = _cubic_roots(E)
        pi = mpmath.pi
        if E.discriminant > 0:
            e1, e2, e3 = sorted((mpmath.re(r) for r in roots), reverse=True)
            w1 = pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            w2 = 1j * pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3))
        else:
            real = [r for r in roots if abs(mpmath.im(r)) < mpmath.mpf(2) ** (-bits // 2) * (1 + abs(r))]
            e1 = mpmath.re(min(real, key=lambda r: abs(mpmath.im(r))))
            a = 3 * e1 + mpmath.mpf(E.b2) / 4
            b = mpmath.sqrt(3 * e1 * e1 + mpmath.mpf(E.b2) / 2 * e1 + mpmath.mpf(E.b4) / 2)
            w1 = 2 * pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b + a))
            w2 = w1 / 2 - 1j * pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b - a))
        w1, w2 = mpmath.mpc(w1), mpmath.mpc(w2)
    return PeriodLattice(w1, w2, bits)


def _reduced_basis(L):
    """Basis (v1, v2) of the same lattice with v2/v1 in the fundamental domain."""
    w1, w2 = L.w1, L.w2
    if (w2 / w1).imag < 0:
        w2 = -w2
    tau, M = reduce_to_fundamental_domain(w2 / w1)
    a, b, c, d = M
    # tau' = (a tau + b)/(c tau + d) = (a w2 + b w1) / (c w2 + d w1)
    return c * w2 + d * w1, a * w2 + b * w1


def _wp_series(z, L, bits, derivative):
    with mpmath.workprec(bits + _GUARD):
        v1, v2 = _reduced_basis(L)
        tau = v2 / v1
        # reduce z into the cell spanned by v1, v2 around 0
        det = (v1.conjugate() * v2).imag
        n = (v1.conjugate() * z).imag / det
        m = (z * v2.conjugate()).imag / (v1 * v2.conjugate()).imag
        z = z - int(mpmath.nint(m)) * v1 - int(mpmath.nint(n)) * v2
        if abs(z) < mpmath.mpf(2) ** (-bits // 2) * abs(v1):
            raise LatticePole("z lies on the period lattice")
        two_pi_i = 2j * mpmath.pi
        u = mpmath.exp(two_pi_i * z / v1)
        q = mpmath.exp(two_pi_i * tau)
        eps = mpmath.mpf(2) ** (-bits - 8)
        aq = abs(q)
        if not derivative:
            s = mpmath.mpf(1) / 12 + u / (1 - u) ** 2
        else:
            s = u * (1 + u) / (1 - u) ** 3
        qn = q
        k = 0
        while True:
            k += 1
            w1 = qn * u
            w2 = qn / u
            if not derivative:
                t = w1 / (1 - w1) ** 2 + w2 / (1 - w2) ** 2 - 2 * qn / (1 - qn) ** 2
            else:
                t = w1 * (1 + w1) / (1 - w1) ** 3 - w2 * (1 + w2) / (1 - w2) ** 3
            s += t
            # |u|^{+-1} <= |q|^{-1/2} after reduction
            if aq ** (k - mpmath.mpf(1) / 2) < eps:
                break
            qn *= q
        f = two_pi_i / v1
        return s * f ** 2 if not derivative else s * f ** 3


def weierstrass_p(z, L, bits=256):
    return _wp_series(mpmath.mpc(z), L, bits, False)


def weierstrass_p_prime(z, L, bits=256):
    return _wp_series(mpmath.mpc(z), L, bits, True)


def lattice_invariants(L, bits=256):
    """(g2, g3) of the lattice from Eisenstein series in the reduced basis."""
    with mpmath.workprec(bits + _GUARD):
        v1, v2 = _reduced_basis(L)
        q = mpmath.exp(2j * mpmath.pi * v2 / v1)
        e4 = 1 + 240 * mpmath.nsum(lambda n: n ** 3 * q ** n / (1 - q ** n), [1, mpmath.inf])
        e6 = 1 - 504 * mpmath.nsum(lambda n: n ** 5 * q ** n / (1 - q ** n), [1, mpmath.inf])
        f = 2 * mpmath.pi / v1
        return f ** 4 * e4 / 12, f ** 6 * e6 / 216
