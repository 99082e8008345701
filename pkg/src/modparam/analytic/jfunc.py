"""The modular invariant j: evaluation, inversion, and class polynomials."""

from __future__ import annotations

from math import gcd, isqrt

import mpmath

from ..algebra.poly import UnivariatePolynomial
from ..algebra.series import _j_coeffs
from .modular import reduce_to_fundamental_domain

_GUARD = 20


def _j_terms(needed):
    return _j_coeffs(max(64, needed))


def _j_sum(tau, prec, derivative=False):
    """j(tau) (and dj/dtau) by the q-series; tau should be reduced."""
    q = mpmath.expjpi(2 * tau)
    aq = abs(q)
    # number of terms: c_n |q|^n < 2^-prec, with c_n < exp(4 pi sqrt n)
    n = 1
    lq = -mpmath.log(aq)
    while 4 * mpmath.pi * mpmath.sqrt(n) - n * lq > -prec * mpmath.log(2) - 5:
        n += 1
        if n > 100000:
            raise ArithmeticError("j series does not converge here")
    coeffs = _j_terms(n + 2)
    # coeffs[i] is the coefficient of q^(i-1)
    total = 0
    dtotal = 0
    qn = 1 / q
    for i in range(min(n + 2, len(coeffs))):
        c = coeffs[i]
        if c:
            total += c * qn
            if derivative:
                dtotal += (i - 1) * c * qn
        qn *= q
    if derivative:
        return total, 2j * mpmath.pi * dtotal
    return total


def eval_j(tau, bits=256):
    """j(tau) for Im tau > 0, absolute error about 2^-bits."""
    with mpmath.workprec(bits + _GUARD):
        t, _ = reduce_to_fundamental_domain(tau)
        # extra precision for the size of j itself
        mag = int(2 * mpmath.pi * t.imag / mpmath.log(2)) + 2
    with mpmath.workprec(bits + mag + _GUARD):
        t, _ = reduce_to_fundamental_domain(tau)
        val = _j_sum(t, bits + mag + _GUARD)
    return val


def eval_j_with_derivative(tau, bits=256):
    """(j(tau), j'(tau)) with tau used as given (no reduction)."""
    with mpmath.workprec(bits + _GUARD):
        return _j_sum(mpmath.mpc(tau), bits + _GUARD, derivative=True)


def _two_torsion_lambda(beta):
    """Legendre lambda of the curve y^2 + xy = x^3 - 36/(b-1728) x - 1/(b-1728)."""
    t = beta - 1728
    a4, a6 = -36 / t, -1 / t
    b2, b4, b6 = 1, 2 * a4, 4 * a6
    # 2-torsion: 4x^3 + b2 x^2 + 2 b4 x + b6 = 0
    e1, e2, e3 = mpmath.polyroots([4, b2, 2 * b4, b6], maxsteps=200, extraprec=mpmath.mp.prec)
    return (e3 - e2) / (e1 - e2)


def tau_from_j(beta, bits=256):
    """tau in the standard fundamental domain with j(tau) = beta."""
    with mpmath.workprec(bits + 2 * _GUARD):
        beta = mpmath.mpc(beta)
        tol = mpmath.mpf(2) ** (-bits // 2) * max(1, abs(beta))
        if abs(beta - 1728) <= tol:
            return mpmath.mpc(0, 1)
        if abs(beta) <= tol:
            return mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)
        lam = _two_torsion_lambda(beta)
        tau = 1j * mpmath.ellipk(1 - lam) / mpmath.ellipk(lam)
        if tau.imag < 0:
            tau = -tau
        tau, _ = reduce_to_fundamental_domain(tau)
        # Newton polish on j(tau) - beta
        for _ in range(8):
            jv, dj = eval_j_with_derivative(tau, bits + _GUARD)
            if abs(dj) < mpmath.mpf(2) ** (-bits // 4) * max(1, abs(jv)):
                break
            step = (jv - beta) / dj
            tau -= step
            if abs(step) < mpmath.mpf(2) ** (-bits - 4):
                break
        tau, _ = reduce_to_fundamental_domain(tau)
    return tau


def reduced_forms(D):
    """Primitive reduced positive definite forms (a, b, c) of discriminant D."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a negative discriminant")
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if c == a and b < 0:
                continue
            if gcd(gcd(a, abs(b)), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return out


def hilbert_class_poly(D, bits=256):
    """H_D(x) by evaluating j at the reduced-form roots and rounding."""
    forms = reduced_forms(D)
    # log2 of the largest coefficient is about sum pi sqrt|D| / a / log 2
    size = sum(int(mpmath.pi * mpmath.sqrt(-D) / a / mpmath.log(2)) + 2 for a, _, _ in forms)
    prec = max(bits, 64) + size
    while prec < 1 << 16:
        with mpmath.workprec(prec):
            roots = [eval_j((-b + mpmath.sqrt(D)) / (2 * a), prec) for a, b, _ in forms]
            coeffs = [mpmath.mpc(1)]
            for r in roots:
                nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
                for i, c in enumerate(coeffs):
                    nxt[i + 1] += c
                    nxt[i] -= c * r
                coeffs = nxt
            ints = [int(mpmath.nint(c.real)) for c in coeffs]
            resid = max(abs(c - n) for c, n in zip(coeffs, ints))
        if resid < 0.01:
            return UnivariatePolynomial(ints)
        prec *= 2
    raise ArithmeticError("class polynomial rounding did not settle")


def class_number(D):
    return len(reduced_forms(D))
