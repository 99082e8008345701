"""Fibers, poles, cusp values and ramification of the modular parametrization.

Everything here consumes the modular polynomials: roots of F(alpha, j) give
the candidate j-values over a point, roots of the leading coefficients give
poles and cusp values, and resultants against the partial derivatives give
candidate ramification points.  Every candidate is confirmed analytically by
evaluating phi at coset translates.
"""

from __future__ import annotations

import ast
import logging
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import mpmath

from .algebra.poly import BivariatePolynomial, UnivariatePolynomial, poly_gcd, resultant, squarefree_part
from .algebra.roots import RootBall, cluster_roots, complex_roots
from .analytic.eichler import (
    INFINITY,
    CurvePoint,
    eichler_gamma,
    gamma_at_cusp,
    lattice,
    phi_eval,
    point_from_z,
)
from .analytic.jfunc import eval_j, tau_from_j
from .analytic.modular import Cusp, coset_reps, cusp_list, equivalent_points
from .modpoly import build_modular_polynomial, leading_coeff_in_j, leading_coeff_in_x

log = logging.getLogger(__name__)

DEFAULT_BITS = 256
_GUARD = 24


# -- numbers ------------------------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_number(text, bits=DEFAULT_BITS):
    """A rational (as Fraction) or an expression in sqrt, I/i, + - * / ** (as mpc)."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        return text
    s = text.strip()
    try:
        return Fraction(s)
    except ValueError:
        pass
    node = ast.parse(s.replace("^", "**"), mode="eval").body

    def ev(n):
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)):
            return mpmath.mpf(n.value) if isinstance(n.value, float) else n.value
        if isinstance(n, ast.Name) and n.id in ("I", "i", "j"):
            return mpmath.mpc(0, 1)
        if isinstance(n, ast.BinOp) and type(n.op) in _OPS:
            a, b = ev(n.left), ev(n.right)
            if isinstance(n.op, ast.Div) and isinstance(a, int) and isinstance(b, int):
                return mpmath.mpf(a) / b
            return _OPS[type(n.op)](a, b)
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = ev(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "sqrt":
            return mpmath.sqrt(ev(n.args[0]))
        raise ValueError(f"cannot parse number {text!r}")

    with mpmath.workprec(bits + _GUARD):
        return mpmath.mpc(ev(node))


def _num(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpc(v) if not isinstance(v, mpmath.mpf) else v


def _close(a, b, tol):
    return abs(a - b) <= tol * max(1, abs(b))


@dataclass(frozen=True)
class AlgebraicNumber:
    """A root of an integer polynomial, isolated by a ball; rational if known."""

    poly: UnivariatePolynomial
    approx: mpmath.mpc
    radius: mpmath.mpf
    rational: Fraction | None = None

    def __str__(self):
        if self.rational is not None:
            return str(self.rational)
        return f"root of {self.poly} near {mpmath.nstr(self.approx, 15)}"


def _rational_root(P, ball):
    """The rational number in the ball that is an exact root of P, if any."""
    c = ball.center
    if abs(c.imag) > ball.radius:
        return None
    lc, c0 = P.coeffs[-1], P.coeffs[0]
    for den in (1, abs(lc)):
        r = Fraction(int(mpmath.nint(c.real * den)), den)
        if abs(_num(r) - c.real) <= ball.radius + mpmath.mpf(2) ** -40 and P(r) == 0:
            return r
    # last resort: continued fraction with denominators dividing lc
    r = Fraction(str(mpmath.nstr(c.real, 40))).limit_denominator(abs(lc))
    if P(r) == 0 and (c0 == 0 or r != 0):
        return r
    return None


def algebraic_roots(P, bits=DEFAULT_BITS):
    """All roots of a nonzero integer polynomial as AlgebraicNumbers (distinct)."""
    P = squarefree_part(P)
    if P.degree < 1:
        return []
    out = []
    for ball in complex_roots(P, bits):
        out.append(AlgebraicNumber(P, ball.center, ball.radius, _rational_root(P, ball)))
    return out


# -- polynomial access ---------------------------------------------------------

def _get(E, polys, kind):
    polys = polys or {}
    M = polys.get(kind)
    if M is None:
        M = build_modular_polynomial(E, kind)
    return M


def _specialize(poly, alpha, bits):
    """poly(alpha, v) as coefficients in v: exact integers when alpha is rational."""
    if isinstance(alpha, Fraction):
        cs = poly.specialize_first(alpha)
        den = lcm(*(c.denominator for c in cs))
        ints = [int(c * den) for c in cs]
        while ints and ints[-1] == 0:
            ints.pop()
        return UnivariatePolynomial(ints, poly.names[1]), True
    with mpmath.workprec(bits + _GUARD):
        cs = poly.specialize_first(mpmath.mpc(alpha))
        # a coefficient is zero only if it vanishes relative to its own
        # rounding error, not relative to the largest coefficient
        a = abs(mpmath.mpc(alpha))
        mags = [sum(abs(c) * a ** k for k, c in enumerate(col.coeffs))
                for col in poly.coefficients_in("second")]
        eps = mpmath.mpf(2) ** (-bits // 2)
        while cs and abs(cs[-1]) <= eps * mags[len(cs) - 1]:
            cs.pop()
        return cs, False


def _roots_of(spec, exact, bits):
    """Root balls (with multiplicity) of a specialized polynomial."""
    if exact:
        if spec.degree < 1:
            return []
        return complex_roots(spec, bits)
    if len(spec) < 2:
        return []
    return cluster_roots(spec, bits)


def _degree_of(spec, exact):
    return max(spec.degree, 0) if exact else len(spec) - 1


# -- fibers -----------------------------------------------------------------------

@dataclass
class FiberMember:
    point: object              # tau (mpc) or Cusp
    value: CurvePoint
    residual: mpmath.mpf
    j: mpmath.mpc | None       # None for cusps
    multiplicity: Fraction

    @property
    def is_cusp(self):
        return isinstance(self.point, Cusp)


@dataclass
class FiberResult:
    target: tuple | None       # (alpha, beta) or None for the point at infinity
    members: list
    degree: int
    j_roots: list = field(default_factory=list)
    unmatched: list = field(default_factory=list)   # j-roots matched by j only
    notes: list = field(default_factory=list)

    @property
    def total_multiplicity(self):
        return sum((m.multiplicity for m in self.members), Fraction(0))

    @property
    def is_ramified(self):
        return len(self.members) < self.degree

    @property
    def defect(self):
        return self.degree - len(self.members)


def _sort_key(m):
    if m.is_cusp:
        return (1, float(m.point.value() if not m.point.is_infinity else 1e300), 0.0)
    return (0, float(m.point.real), float(m.point.imag))


def _dedupe(points, N, tol):
    out = []
    for p in points:
        if not any(equivalent_points(p[0], q[0], N, tol) is not None for q in out):
            out.append(p)
    return out


def _lift_root(E, j0, reps, Z, alpha, bits):
    """All coset translates of a tau with j(tau) = j0 whose phi has x = alpha."""
    N = E.N
    tol = mpmath.mpf(2) ** (-bits // 4)
    jtol = mpmath.mpf(2) ** (-bits // 8)
    hits = []
    with mpmath.workprec(bits + _GUARD):
        tau0 = tau_from_j(j0, bits)
        for M in reps:
            t = M.act(tau0)
            if Z is not None:
                J = eval_j(N * t, bits)
                if not any(_close(J, z, jtol) for z in Z):
                    continue
            pt = phi_eval(E, t, bits)
            if pt.is_infinity or not _close(pt.x, alpha, tol):
                continue
            hits.append((t, pt))
        return _dedupe(hits, N, tol)


def _normalize_target(E, P, bits):
    if P is None or (isinstance(P, str) and P.strip() in ("oo", "inf", "infinity")):
        return None
    a, b = (parse_number(v, bits) for v in P)
    return a, b


def fiber(E, P, polys=None, bits=DEFAULT_BITS):
    """phi^{-1}(P) for P = (alpha, beta) on E, or P = None for the point at infinity."""
    target = _normalize_target(E, P, bits)
    if target is None:
        return _fiber_at_infinity(E, polys, bits)
    alpha, beta = target
    F = _get(E, polys, "F")
    f = _get(E, polys, "f")
    d = F.degree
    tol = mpmath.mpf(2) ** (-bits // 4)
    with mpmath.workprec(bits + _GUARD):
        a_num, b_num = _num(alpha), _num(beta)
        resid = E.equation(a_num, b_num)
        if abs(resid) > tol * max(1, abs(a_num) ** 3):
            raise ValueError(f"point ({alpha}, {beta}) is not on the curve")
        two_torsion = abs(2 * b_num + E.a1 * a_num + E.a3) <= tol * max(1, abs(b_num))
    specF, exactF = _specialize(F.poly, alpha, bits)
    specf, exactf = _specialize(f.poly, alpha, bits)
    jroots = _roots_of(specF, exactF, bits)
    Z = [b.center for b in _roots_of(specf, exactf, bits)]
    Lp = _degree_of(specF, exactF)
    # points of X0(N) over one root of F(alpha, j): r times its multiplicity
    r = Fraction(2 * d, F.L)
    halve = 2 if two_torsion else 1
    reps = coset_reps(E.N)
    members, unmatched = [], []
    for ball in jroots:
        hits = _lift_root(E, ball.center, reps, Z, a_num, bits)
        if not hits:
            unmatched.append(ball)
            continue
        share = r * ball.multiplicity / len(hits) / halve
        for t, pt in hits:
            if _close(pt.y, b_num, tol):
                res = max(abs(pt.x - a_num), abs(pt.y - b_num))
                members.append(FiberMember(t, pt, res, ball.center, share))
    notes = []
    # cusps absorb the roots of F(alpha, j) lost at j = infinity
    cv = cusp_values(E, polys, bits)
    over_x = [c for c, v in cv.items() if not v.point.is_infinity and _close(v.point.x, a_num, tol)]
    if over_x:
        share = r * (F.L - Lp) / len(over_x) / halve
        for c in over_x:
            pt = cv[c].point
            if _close(pt.y, b_num, tol):
                res = max(abs(pt.x - a_num), abs(pt.y - b_num))
                members.append(FiberMember(c, pt, res, None, share))
    elif Lp < F.L:
        notes.append(f"F(alpha, j) has degree {Lp} < {F.L} but no cusp has this x-value")
    if unmatched:
        notes.append(f"{len(unmatched)} j-root(s) matched by j only (no verified translate)")
    members.sort(key=_sort_key)
    return FiberResult((alpha, beta), members, d, jroots, unmatched, notes)


def _fiber_at_infinity(E, polys, bits):
    F = _get(E, polys, "F")
    d = F.degree
    poles = noncusp_poles(E, polys, bits)
    cv = cusp_values(E, polys, bits)
    members = [FiberMember(p.tau, INFINITY, mpmath.mpf(0), p.j, Fraction(1)) for p in poles]
    members += [FiberMember(c, INFINITY, mpmath.mpf(0), None, Fraction(1))
                for c, v in cv.items() if v.point.is_infinity]
    members.sort(key=_sort_key)
    res = FiberResult(None, members, d)
    # pole orders at cusps are not visible to F; the defect is reported instead
    if len(members) < d:
        res.notes.append(f"cusp ramification suspected (defect {d - len(members)}), "
                         "external criterion required")
    return res


def fiber_j_product(E, P, polys=None, bits=DEFAULT_BITS, max_bits=4096):
    """prod over non-cuspidal fiber members of (x - j(tau))^e, as a primitive integer polynomial."""
    alpha, beta = _normalize_target(E, P, bits)
    if not isinstance(alpha, Fraction):
        raise ValueError("fiber_j_product needs a rational x-coordinate")
    F = _get(E, polys, "F")
    fib = fiber(E, P, polys, bits)
    spec, _ = _specialize(F.poly, alpha, bits)
    lam = spec.coeffs[-1]
    chosen = []
    for m in fib.members:
        if m.is_cusp:
            continue
        if m.multiplicity.denominator != 1:
            raise ArithmeticError(f"non-integral multiplicity {m.multiplicity}")
        chosen.append((m.j, int(m.multiplicity)))
    if not chosen:
        return UnivariatePolynomial([1])
    prec = bits
    while prec <= max_bits:
        # precision for the size of lam * prod (x - j)
        with mpmath.workprec(64):
            mag = mpmath.log(abs(lam) + 1, 2) + sum(e * mpmath.log(1 + abs(j), 2) for j, e in chosen)
        need = int(mag) + 64
        if need * 2 > prec:
            prec = 2 * need
        balls = complex_roots(spec, prec)
        with mpmath.workprec(prec):
            roots = []
            for j, e in chosen:
                best = min(balls, key=lambda b: abs(b.center - j))
                roots += [best.center] * e
            coeffs = [mpmath.mpc(1)]
            for z in roots:
                nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
                for i, c in enumerate(coeffs):
                    nxt[i + 1] += c
                    nxt[i] -= c * z
                coeffs = nxt
            scaled = [c * lam for c in coeffs]
            ints = [int(mpmath.nint(c.real)) for c in scaled]
            resid = max(abs(c - n) for c, n in zip(scaled, ints))
        if resid < 0.01:
            out = UnivariatePolynomial(ints, "x").primitive()
            if not out.divides(UnivariatePolynomial(spec.coeffs, "x")):
                raise ArithmeticError("reconstructed fiber polynomial does not divide F(alpha, j)")
            return out
        prec *= 2
    raise ArithmeticError("fiber polynomial rounding did not settle")


# -- poles ------------------------------------------------------------------------

@dataclass
class Pole:
    tau: mpmath.mpc
    j: mpmath.mpc
    lattice_point: tuple       # (m, n) with gamma(tau) = m w1 + n w2
    gamma: mpmath.mpc


def noncusp_poles(E, polys=None, bits=DEFAULT_BITS):
    """Representatives tau in H (one per point of X0(N)) with x(tau) = infinity."""
    F = _get(E, polys, "F")
    A = leading_coeff_in_x(F)
    if A.degree < 1:
        return []
    L = lattice(E, bits)
    tol = mpmath.mpf(2) ** (-bits // 4)
    reps = coset_reps(E.N)
    out = []
    for ball in complex_roots(squarefree_part(A), bits):
        with mpmath.workprec(bits + _GUARD):
            tau0 = tau_from_j(ball.center, bits)
            hits = []
            for M in reps:
                t = M.act(tau0)
                g = eichler_gamma(E, t, bits)
                mn = L.snap(g, tol)
                if mn is not None:
                    hits.append((t, mn, g))
            for t, mn, g in _dedupe(hits, E.N, tol):
                out.append(Pole(+t, ball.center, mn, +g))
    out.sort(key=lambda p: (float(p.tau.real), float(p.tau.imag)))
    return out


# -- cusps ------------------------------------------------------------------------

@dataclass
class CuspValue:
    point: CurvePoint
    x: AlgebraicNumber | None = None
    y: AlgebraicNumber | None = None

    def __str__(self):
        if self.point.is_infinity:
            return "oo"
        return f"({self.x}, {self.y})"


_CUSP_CACHE = {}


def cusp_values(E, polys=None, bits=DEFAULT_BITS):
    """phi at every cusp class, with exact values read off B_L(x) and C(y)."""
    key = (E.ainvs, E.N, bits)
    if key in _CUSP_CACHE:
        return _CUSP_CACHE[key]
    F = _get(E, polys, "F")
    cusps = cusp_list(E.N)
    B = leading_coeff_in_j(F)
    if B.degree < 1:
        out = {c: CuspValue(INFINITY) for c in cusps}
        _CUSP_CACHE[key] = out
        return out
    G = _get(E, polys, "G")
    C = leading_coeff_in_j(G)
    tol = mpmath.mpf(2) ** (-bits // 4)
    xs = algebraic_roots(B, bits)
    ys = algebraic_roots(C, bits) if C.degree >= 1 else []
    cands = []
    with mpmath.workprec(bits + _GUARD):
        for xa in xs:
            for ya in ys:
                if abs(E.equation(xa.approx, ya.approx)) <= tol * max(1, abs(xa.approx) ** 3):
                    cands.append((xa, ya))
    out = {}
    for c in cusps:
        z = gamma_at_cusp(E, c, bits)
        pt = point_from_z(E, z, bits)
        if pt.is_infinity:
            out[c] = CuspValue(INFINITY)
            continue
        near = [(xa, ya) for xa, ya in cands
                if _close(pt.x, xa.approx, tol) and _close(pt.y, ya.approx, tol)]
        if len(near) > 1:
            if bits < 4096:
                _CUSP_CACHE.pop(key, None)
                return cusp_values(E, polys, 2 * bits)
            raise ArithmeticError(f"ambiguous exact value at the cusp {c}")
        if not near:
            log.warning("cusp %s: value %s matches no root pair of B_L, C", c, pt)
            out[c] = CuspValue(pt)
            continue
        xa, ya = near[0]
        out[c] = CuspValue(pt, xa, ya)
    _CUSP_CACHE[key] = out
    return out


# -- ramification ----------------------------------------------------------------

@dataclass
class RamifiedPoint:
    x: AlgebraicNumber
    y: AlgebraicNumber
    fiber: FiberResult

    @property
    def index_deficit(self):
        return self.fiber.defect


@dataclass
class RamificationReport:
    U: UnivariatePolynomial
    V: UnivariatePolynomial
    points: list                     # RamifiedPoint, non-cuspidal
    unramified: list                 # (x, y, fiber) pairs tested and rejected
    cusp_flags: list                 # (value, defect, cusps) from the fiber bookkeeping
    resultants: dict = field(default_factory=dict)


def discriminant_factor(M):
    """Res_v(P, dP/dv) for a bidegree-(K, L) polynomial P(u, v), as a polynomial in u."""
    return resultant(M.poly, M.poly.derivative("second"), "second")


def curve_polynomial(E):
    """y^2 + a1 xy + a3 y - (x^3 + a2 x^2 + a4 x + a6) as a polynomial in (x, y)."""
    g = [[-E.a6, E.a3, 1], [-E.a4, E.a1, 0], [-E.a2, 0, 0], [-1, 0, 0]]
    return BivariatePolynomial(g, ("x", "y"))


def pairing_polynomial(E, V):
    """Res_y(E(x, y), V(y)): its roots are the x-coordinates of points of E with V(y) = 0."""
    Vb = BivariatePolynomial([list(V.coeffs)], ("x", "y"))
    return resultant(curve_polynomial(E), Vb, "second")


def ramification_points(E, polys=None, bits=DEFAULT_BITS):
    """Algorithm: gcd of discriminant resultants in x and in y, pairing, fiber test."""
    F, f = _get(E, polys, "F"), _get(E, polys, "f")
    G, g = _get(E, polys, "G"), _get(E, polys, "g")
    d = F.degree
    R1, R2 = discriminant_factor(F), discriminant_factor(f)
    R3, R4 = discriminant_factor(G), discriminant_factor(g)
    U = poly_gcd(R1, R2)
    V = poly_gcd(R3, R4)
    # only x-roots of U lying under a y-root of V matter; cut U down exactly
    # with Res_y(E(x, y), V(y)) before any numerics
    X = poly_gcd(squarefree_part(U), pairing_polynomial(E, squarefree_part(V))) if V.degree >= 1 else None
    xs = algebraic_roots(X, bits) if X is not None and X.degree >= 1 else []
    ys = algebraic_roots(V, bits) if V.degree >= 1 else []
    tol = mpmath.mpf(2) ** (-bits // 4)
    pairs = []
    with mpmath.workprec(bits + _GUARD):
        for xa in xs:
            for ya in ys:
                if abs(E.equation(xa.approx, ya.approx)) <= tol * max(1, abs(xa.approx) ** 3):
                    pairs.append((xa, ya))
    points, rejected = [], []
    for xa, ya in pairs:
        a = xa.rational if xa.rational is not None else xa.approx
        b = ya.rational if ya.rational is not None else ya.approx
        fib = fiber(E, (a, b), polys, bits)
        if fib.is_ramified:
            points.append(RamifiedPoint(xa, ya, fib))
        else:
            rejected.append((xa, ya, fib))
    flags = _cusp_defects(E, polys, bits, d)
    return RamificationReport(U, V, points, rejected, flags,
                              {"R1": R1, "R2": R2, "R3": R3, "R4": R4})


def _cusp_defects(E, polys, bits, d):
    """For each value of phi on cusps, the multiplicity shortfall of its fiber."""
    cv = cusp_values(E, polys, bits)
    groups = {}
    for c, v in cv.items():
        key = "oo" if v.point.is_infinity else (str(v.x), str(v.y))
        groups.setdefault(key, (v, []))[1].append(c)
    flags = []
    for key, (v, cs) in groups.items():
        if v.point.is_infinity:
            fib = _fiber_at_infinity(E, polys, bits)
            shortfall = d - len(fib.members)
        else:
            a = v.x.rational if v.x.rational is not None else v.x.approx
            b = v.y.rational if v.y.rational is not None else v.y.approx
            fib = fiber(E, (a, b), polys, bits)
            shortfall = d - len(fib.members)
        if shortfall > 0:
            flags.append((v, shortfall, cs))
    return flags
