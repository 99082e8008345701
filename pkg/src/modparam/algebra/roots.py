"""Certified complex roots by Aberth iteration.

Each squarefree factor is solved separately.  A root approximation z_k is
certified with the inclusion radius n |P(z_k)| / |lc prod_{j!=k} (z_k - z_j)|:
the union of these disks holds every root, and when the disks are pairwise
disjoint each one holds exactly one.  Precision doubles until every radius
is below the requested bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .poly import UnivariatePolynomial, squarefree_decomposition


@dataclass(frozen=True)
class RootBall:
    center: mpmath.mpc
    radius: mpmath.mpf
    multiplicity: int = 1

    def contains(self, z):
        return abs(mpmath.mpc(z) - self.center) <= self.radius


class RootFindingError(ArithmeticError):
    pass


def _horner_with_derivative(cs, z):
    p = cs[-1]
    dp = 0
    for c in reversed(cs[:-1]):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(cs):
    n = len(cs) - 1
    # Fujiwara bound on root moduli
    bound = max(2 * abs(cs[n - k] / cs[-1]) ** (mpmath.mpf(1) / k) if cs[n - k] else 0
                for k in range(1, n + 1))
    lower = 0
    if cs[0]:
        # 1 / (Fujiwara bound of the reversed polynomial)
        rb = max(2 * abs(cs[k] / cs[0]) ** (mpmath.mpf(1) / k) if cs[k] else 0
                 for k in range(1, n + 1))
        lower = 1 / rb if rb else 0
    r = mpmath.sqrt(bound * lower) if lower else bound / 2
    if not r:
        r = mpmath.mpf(1)
    return [r * mpmath.expj(2 * mpmath.pi * k / n + mpmath.mpf(0.4)) for k in range(n)]


def aberth(cs, tol, maxiter=2000, start=None, strict=True):
    """Approximate all roots of sum cs[k] z^k (cs complex or real mpmath numbers)."""
    n = len(cs) - 1
    if n == 1:
        return [-cs[0] / cs[1]]
    z = list(start) if start else _initial_guesses(cs)
    done = [False] * n
    mags = [abs(c) for c in cs]
    for _ in range(maxiter):
        moved = 0
        for k in range(n):
            if done[k]:
                continue
            p, dp = _horner_with_derivative(cs, z[k])
            # at the rounding floor of the evaluation the correction is noise
            if abs(p) <= tol * _horner_with_derivative(mags, abs(z[k]))[0]:
                done[k] = True
                continue
            w = p / dp if dp != 0 else mpmath.mpc(tol)
            s = mpmath.fsum(1 / (z[k] - z[j]) for j in range(n) if j != k)
            corr = w / (1 - w * s)
            z[k] -= corr
            if abs(corr) <= tol * max(1, abs(z[k])):
                done[k] = True
            else:
                moved += 1
        if not moved:
            return z
    if not strict:
        return z
    raise RootFindingError("Aberth iteration did not converge")


def _certify(cs, z):
    """Inclusion radii; None if two disks overlap."""
    n = len(cs) - 1
    lc = cs[-1]
    # evaluation error allowance for the working precision
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec + 4)
    radii = []
    for k in range(n):
        zk = z[k]
        p, _ = _horner_with_derivative(cs, zk)
        scale = mpmath.fsum(abs(c) * abs(zk) ** i for i, c in enumerate(cs))
        denom = abs(lc)
        for j in range(n):
            if j != k:
                denom *= abs(zk - z[j])
        if denom == 0:
            return None
        radii.append(n * (abs(p) + eps * scale) / denom)
    for k in range(n):
        for j in range(k + 1, n):
            if abs(z[k] - z[j]) <= radii[k] + radii[j]:
                return None
    return radii


def _to_mpc(v):
    if isinstance(v, Fraction):
        return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
    return mpmath.mpc(v)


def roots_of_squarefree(cs, bits, max_prec=1 << 16):
    """Certified balls (radius <= 2^(-bits/2)) for a squarefree coefficient list.

    cs may hold ints, Fractions or mpmath numbers; exact input is re-rounded
    at each precision so that escalation gains real accuracy.
    """
    target_exp = -(bits // 2)
    prec = max(2 * bits, 64)
    z = None
    while prec <= max_prec:
        with mpmath.workprec(prec):
            c = [_to_mpc(v) for v in cs]
            try:
                z = aberth(c, mpmath.mpf(2) ** (-prec + 8), start=z)
            except RootFindingError:
                z = None
                prec *= 2
                continue
            radii = _certify(c, z)
            target = mpmath.mpf(2) ** target_exp
            if radii is not None and all(r <= target for r in radii):
                return [RootBall(+zk, +rk) for zk, rk in zip(z, radii)]
        prec *= 2
    raise RootFindingError("could not certify roots")


def complex_roots(P, bits=128):
    """All roots of an integer polynomial as certified balls with multiplicity."""
    if not isinstance(P, UnivariatePolynomial):
        P = UnivariatePolynomial(P)
    if P.degree < 1:
        raise ValueError("complex_roots needs a polynomial of degree >= 1")
    out = []
    for factor, mult in squarefree_decomposition(P):
        for ball in roots_of_squarefree(list(factor.coeffs), bits):
            out.append(RootBall(ball.center, ball.radius, mult))
    return out


def cluster_roots(cs, bits):
    """Roots of a polynomial with inexact complex coefficients, grouped.

    Without exact arithmetic the squarefree split is numerical: Aberth
    approximations closer than 2^(-bits/3) (relative) are merged and the
    cluster size is reported as multiplicity.  Radii are not certified.
    """
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    n = len(cs) - 1
    if n < 1:
        return []
    with mpmath.workprec(max(2 * bits, 64)):
        c = [_to_mpc(v) for v in cs]
        z = aberth(c, mpmath.mpf(2) ** (-2 * bits + 8), maxiter=400, strict=False)
        tol = mpmath.mpf(2) ** (-bits / 3)
        groups = []
        for zk in z:
            for g in groups:
                if abs(zk - g[0]) <= tol * max(1, abs(g[0])):
                    g.append(zk)
                    break
            else:
                groups.append([zk])
        out = []
        for g in groups:
            center = mpmath.fsum(g) / len(g)
            spread = max(abs(w - center) for w in g)
            out.append(RootBall(+center, +spread, len(g)))
    return out
