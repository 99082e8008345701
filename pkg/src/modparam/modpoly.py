"""Modular polynomials F(x,j), f(x,J), G(y,j), g(y,J) from q-expansions.

A relation sum c[k][l] u^k v^l = 0 between the coordinate function u (x or
y) and v (j(q) or J = j(Nq)) is found as the kernel of the linear system on
q-expansion coefficients.  Everything is multiplied by q^(aK + bL), where a
and b are the pole orders of u and v at infinity, so every column
q^(a(K-k) + b(L-l)) * U^k * V^l is an ordinary power series.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import flint

from .algebra.linalg import (
    RationalMatrix,
    intersect_column_spaces,
    multimodular_kernel,
    primitive_integer_vector,
    _prime_stream,
)
from .algebra.poly import BivariatePolynomial, UnivariatePolynomial
from .algebra.series import LaurentSeries, j_series
from .curve import EllipticCurve, gamma0_index, taniyama_series

log = logging.getLogger(__name__)

KINDS = {
    "F": ("x", "j"),
    "f": ("x", "J"),
    "G": ("y", "j"),
    "g": ("y", "J"),
}

DEFAULT_MARGIN = 60
VERIFY_EXTRA = 40


class ModularPolynomialError(ArithmeticError):
    pass


class KernelTooSmall(ModularPolynomialError):
    """No relation inside the bounds (series precision or bounds too low)."""


class ReducibleRelation(ModularPolynomialError):
    """Kernel of dimension >= 2 at the minimal bidegree."""


class NoRepresentation(ModularPolynomialError):
    """Algorithm-6 system has no usable solution at the given bounds."""


@dataclass(frozen=True)
class ModularPolynomial:
    kind: str
    poly: BivariatePolynomial
    K: int
    L: int
    curve: EllipticCurve
    precision: int
    degree: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def names(self):
        return KINDS[self.kind]

    def leading_coeff_in_x(self):
        return leading_coeff_in_x(self)

    def leading_coeff_in_j(self):
        return leading_coeff_in_j(self)


def leading_coeff_in_x(M):
    """A_K(j): the coefficient of u^K, a polynomial in the second variable."""
    return M.poly.coefficients_in("first")[-1]


def leading_coeff_in_j(M):
    """B_L(u): the coefficient of v^L, a polynomial in the first variable."""
    return M.poly.coefficients_in("second")[-1]


# -- series sources -------------------------------------------------------

_TANIYAMA = {}


def _taniyama(E, M):
    key = (E.ainvs, E.N)
    got = _TANIYAMA.get(key)
    if got is None or got.xq.prec < M:
        got = taniyama_series(E, max(M, 2 * got.xq.prec if got else 0))
        _TANIYAMA[key] = got
    return got


def _power_part(s, a, n):
    """First n coefficients of q^a * s, which must be a power series."""
    out = [s[m - a] for m in range(n)]
    return out


class SeriesSource:
    """Exact power-series parts U = q^a u and V = q^b v for one kind."""

    def __init__(self, E, kind):
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        self.E = E
        self.kind = kind
        self.a = 2 if kind in "Ff" else 3
        self.b = 1 if kind in "FG" else E.N
        self._U = []
        self._V = []

    def U(self, n):
        if len(self._U) < n:
            t = _taniyama(self.E, n + 2)
            s = t.xq if self.a == 2 else t.yq
            self._U = _power_part(s, self.a, n)
        return self._U[:n]

    def V(self, n):
        if len(self._V) < n:
            if self.b == 1:
                self._V = list(j_series(n).coeffs[:n])
            else:
                N = self.b
                jc = j_series(n // N + 1).coeffs
                out = [0] * n
                for i in range(0, n, N):
                    out[i] = jc[i // N]
                self._V = out
        return self._V[:n]

    def u_series(self, n):
        t = _taniyama(self.E, n + 2)
        return t.xq if self.a == 2 else t.yq


def _reduce(coeffs, p):
    out = []
    for c in coeffs:
        if isinstance(c, Fraction):
            if c.denominator % p == 0:
                return None
            out.append(c.numerator * pow(c.denominator, -1, p) % p)
        else:
            out.append(c % p)
    return out


def _columns_mod_p(U, V, a, b, K, L, R, p):
    """Columns of the (K, L) system with R rows, as lists of residues."""
    Ur = _reduce(U[:R], p)
    Vr = _reduce(V[:R], p)
    if Ur is None or Vr is None:
        return None
    Up = flint.nmod_poly(Ur, p)
    Vp = flint.nmod_poly(Vr, p)
    one = flint.nmod_poly([1], p)
    upow = [one]
    for _ in range(K):
        upow.append(upow[-1].mul_low(Up, R))
    vpow = [one]
    for _ in range(L):
        vpow.append(vpow[-1].mul_low(Vp, R))
    cols = []
    for k in range(K + 1):
        for l in range(L + 1):
            s = a * (K - k) + b * (L - l)
            if s >= R:
                cols.append([0] * R)
                continue
            prod = upow[k].mul_low(vpow[l], R - s)
            c = [int(v) for v in prod.coeffs()]
            cols.append([0] * s + c + [0] * (R - s - len(c)))
    return cols


def _matrix_from_columns(cols, R, p):
    C = len(cols)
    flat = [v for c in cols for v in c]
    return flint.nmod_mat(C, R, flat, p).transpose()


def _system_mod_p(src, K, L, R, p):
    cols = _columns_mod_p(src.U(R), src.V(R), src.a, src.b, K, L, R, p)
    if cols is None:
        return None
    return _matrix_from_columns(cols, R, p)


def _rows_for(src, K, L, margin):
    # the rows must cover every pole order plus one equation per unknown
    return src.a * K + src.b * L + (K + 1) * (L + 1) + margin


def kernel_dimension(src, K, L, p, margin=DEFAULT_MARGIN):
    R = _rows_for(src, K, L, margin)
    M = _system_mod_p(src, K, L, R, p)
    return M.ncols() - M.rank()


# -- exact verification -----------------------------------------------------

def _int_series(coeffs):
    den = lcm(*[c.denominator for c in coeffs if isinstance(c, Fraction)] or [1])
    return flint.fmpz_poly([int(c * den) for c in coeffs]), den


def relation_residual(poly, U, V, a, b, n):
    """q^(aK+bL) D^K poly(u, v) modulo q^n as an fmpz_poly (zero iff it vanishes).

    U, V are exact power-series parts; D clears the denominators of U.
    """
    K, L = poly.degrees
    Ui, D = _int_series(U[:n])
    Vi, E = _int_series(V[:n])
    blocks = []
    for l in range(L + 1):
        # Horner in k: sum_k c_kl D^(K-k) q^(a(K-k)) U^k
        acc = flint.fmpz_poly([poly.coeff(K, l)])
        for k in range(K - 1, -1, -1):
            acc = acc.mul_low(Ui, n)
            c = poly.coeff(k, l)
            if c:
                term = flint.fmpz_poly([0] * (a * (K - k)) + [c * D ** (K - k)])
                acc += term
            acc = acc.truncate(n) if acc.degree() >= n else acc
        blocks.append(acc)
    acc = blocks[L]
    for l in range(L - 1, -1, -1):
        acc = acc.mul_low(Vi, n)
        if not blocks[l].is_zero():
            acc += (blocks[l] * flint.fmpz_poly([0] * (b * (L - l)) + [E ** (L - l)])).truncate(n)
    return acc


def verify_relation(M, extra=VERIFY_EXTRA, length=None):
    """Exact check that M.poly(u(q), v(q)) vanishes to the series precision used."""
    src = SeriesSource(M.curve, M.kind)
    n = length or (M.precision + extra)
    r = relation_residual(M.poly, src.U(n), src.V(n), src.a, src.b, n)
    return r.is_zero()


# -- bidegree search ------------------------------------------------------

def degree_bounds(E, d=None, kind="F"):
    """(mu, d, K0, L0) with K0 = mu and L0 = 2d (3d for the y kinds)."""
    mu = gamma0_index(E.N)
    if d is None:
        d = modular_degree(E)
    L0 = 2 * d if kind in "Ff" else 3 * d
    return mu, d, mu, L0


def _min_true(lo, hi, pred):
    """Smallest n in [lo, hi] with pred(n), pred monotone and pred(hi) true."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def find_bidegree(src, K0, L0, p, margin=DEFAULT_MARGIN):
    """Minimal (K, L) with a nontrivial kernel inside the box K0 x L0.

    Nontriviality holds exactly when K >= K* and L >= L*, so K is found
    with L at its bound and then L with K at its minimum.
    """
    if kernel_dimension(src, K0, L0, p, margin) == 0:
        return None
    K = _min_true(1, K0, lambda k: kernel_dimension(src, k, L0, p, margin) > 0)
    L = _min_true(1, L0, lambda l: kernel_dimension(src, K, l, p, margin) > 0)
    return K, L


def find_bidegree_unbounded_L(src, K0, p, margin=DEFAULT_MARGIN, L_cap=256):
    """Like find_bidegree when the degree d (hence L0) is unknown."""
    L = 1
    while kernel_dimension(src, K0, L, p, margin) == 0:
        L *= 2
        if L > L_cap:
            raise KernelTooSmall(f"no relation with L <= {L_cap}; check the conductor or pass the degree")
    return find_bidegree(src, K0, L, p, margin)


_BUILT = {}


def build_modular_polynomial(E, kind="F", d=None, margin=DEFAULT_MARGIN, use_half_box=True):
    """Minimal-bidegree integer relation of the given kind, verified exactly."""
    key = (E.ainvs, E.N, kind)
    if key in _BUILT:
        return _BUILT[key]
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    mu = gamma0_index(E.N)
    src = SeriesSource(E, kind)
    primes = _prime_stream()
    p_search = next(primes)
    p_confirm = next(primes)
    if d is None and kind in "Gg":
        d = modular_degree(E)
    for attempt in range(3):
        box = None
        if d is not None:
            L0 = 2 * d if kind in "Ff" else 3 * d
            if use_half_box and E.N % 4 == 0 and kind in "Ff":
                box = find_bidegree(src, mu // 2, d, p_search, margin)
                if box:
                    log.info("relation found in the reduced box (mu/2, d)")
            if box is None:
                box = find_bidegree(src, mu, L0, p_search, margin)
        else:
            box = find_bidegree_unbounded_L(src, mu, p_search, margin)
        if box is None:
            raise KernelTooSmall(f"no {kind}-relation with K <= {mu}")
        K, L = box
        # second prime guards against an unlucky search prime
        if kernel_dimension(src, K, L, p_confirm, margin) == 0:
            K, L = find_bidegree(src, mu, 2 * max(L, 1), p_confirm, margin)
        try:
            poly, R = _solve_at(src, K, L, margin)
        except ReducibleRelation:
            raise
        M = ModularPolynomial(kind, poly, K, L, E, R, d)
        if verify_relation(M):
            if d is None and kind in "Ff":
                dd = Fraction(mu * L, 2 * K)
                if dd.denominator != 1:
                    raise ModularPolynomialError(f"degree mu*L/(2K) = {dd} is not an integer")
                M = ModularPolynomial(kind, poly, K, L, E, R, int(dd))
            _BUILT[key] = M
            return M
        log.warning("relation failed exact verification; enlarging margin")
        margin *= 2
    raise ModularPolynomialError("relation could not be verified")


def _solve_at(src, K, L, margin):
    C = (K + 1) * (L + 1)
    R = _rows_for(src, K, L, margin)
    dims = []

    def reduce_mod(p):
        M = _system_mod_p(src, K, L, R, p)
        if M is not None and not dims:
            dims.append(M.ncols() - M.rank())
            if dims[0] >= 2:
                raise ReducibleRelation(f"kernel dimension {dims[0]} at ({K}, {L})")
        return M

    vecs = multimodular_kernel(reduce_mod, C)
    if len(vecs) != 1:
        raise ReducibleRelation(f"kernel dimension {len(vecs)} at ({K}, {L})")
    ints = primitive_integer_vector(vecs[0])
    poly = BivariatePolynomial.from_vector(ints, K, L, KINDS[src.kind]).normalize()
    if poly.degrees != (K, L):
        raise ModularPolynomialError(f"attained degrees {poly.degrees} differ from ({K}, {L})")
    return poly, R


def modular_degree(E):
    """deg(phi) = mu * L / (2K) from the attained bidegree of F."""
    return build_modular_polynomial(E, "F").degree


def clear_cache():
    _BUILT.clear()
    _TANIYAMA.clear()


def register(M):
    """Insert an externally loaded polynomial into the in-memory cache."""
    _BUILT[(M.curve.ainvs, M.curve.N, M.kind)] = M


# -- rational representations -----------------------------------------------

@dataclass(frozen=True)
class RationalRepresentation:
    P: BivariatePolynomial
    Q: BivariatePolynomial
    target: str
    bounds: tuple
    precision: int


def _products(gen1, gen2, K, L, extra=None):
    """Series gen1^k gen2^l (times extra) for k <= K, l <= L."""
    p1 = [LaurentSeries.constant(1)]
    for _ in range(K):
        p1.append(p1[-1] * gen1)
    p2 = [LaurentSeries.constant(1)]
    for _ in range(L):
        p2.append(p2[-1] * gen2)
    out = []
    for k in range(K + 1):
        for l in range(L + 1):
            s = p1[k] * p2[l]
            if extra is not None:
                s = s * extra
            out.append(s)
    return out


def build_rational_rep(target, gen1, gen2, bounds, names=("X", "Y"), target_name="x",
                       precision=None):
    """target = P(gen1, gen2) / Q(gen1, gen2) with deg P <= (K, L), deg Q <= (R, S)."""
    K, L, R, S = bounds
    M = precision or max((K + 1) * (L + 1), (R + 1) * (S + 1)) + 50
    cols_u = _products(gen1, gen2, K, L)
    cols_v = _products(gen1, gen2, R, S, extra=target)
    low = min(min(s.valuation for s in cols_u), min(s.valuation for s in cols_v))
    known = min(min(s.prec for s in cols_u), min(s.prec for s in cols_v))
    top = min(M, known)
    if top - low < len(cols_u) + len(cols_v):
        raise ValueError("series precision too low for the requested bounds")
    rows = range(low, top)
    A = RationalMatrix([[s[n] for s in cols_u] for n in rows], len(cols_u))
    B = RationalMatrix([[s[n] for s in cols_v] for n in rows], len(cols_v))
    pairs = intersect_column_spaces(A, B)
    for c, dvec in pairs:
        if not any(dvec):
            continue
        vec = primitive_integer_vector(list(c) + list(dvec))
        nc = (K + 1) * (L + 1)
        P = BivariatePolynomial.from_vector(vec[:nc], K, L, names)
        Q = BivariatePolynomial.from_vector(vec[nc:], R, S, names)
        sign = -1 if _top_sign(Q) < 0 else 1
        if sign < 0:
            P = BivariatePolynomial([[-v for v in r] for r in P.grid], names)
            Q = BivariatePolynomial([[-v for v in r] for r in Q.grid], names)
        return RationalRepresentation(P, Q, target_name, (K, L, R, S), top)
    raise NoRepresentation(f"no representation with bounds {bounds}")


def _top_sign(B):
    for k in range(B.degree_first, -1, -1):
        for l in range(B.degree_second, -1, -1):
            c = B.coeff(k, l)
            if c:
                return c
    return 0


def evaluate_on_series(B, gen1, gen2):
    """B(gen1, gen2) as a LaurentSeries."""
    total = LaurentSeries.constant(0)
    p1 = LaurentSeries.constant(1)
    for k in range(B.degree_first + 1):
        inner = LaurentSeries.constant(0)
        p2 = LaurentSeries.constant(1)
        for l in range(B.degree_second + 1):
            c = B.coeff(k, l)
            if c:
                inner = inner + p2.scale(c)
            p2 = p2 * gen2
        total = total + p1 * inner
        p1 = p1 * gen1
    return total


def verify_rational_rep(rep, target, gen1, gen2):
    lhs = evaluate_on_series(rep.Q, gen1, gen2) * target
    rhs = evaluate_on_series(rep.P, gen1, gen2)
    return (lhs - rhs).is_zero()


def build_rational_rep_escalating(target_fn, gen_fn, bounds, rounds=3, **kw):
    """Retry with all bounds doubled when no representation exists.

    target_fn(M) and gen_fn(M) must return series known to q^M.
    """
    b = tuple(bounds)
    for _ in range(rounds + 1):
        M = max((b[0] + 1) * (b[1] + 1), (b[2] + 1) * (b[3] + 1)) + 50
        # products of series with poles lose precision; probe the valuations
        # and ask for enough terms that every product is still known to q^M
        g1, g2 = gen_fn(M)
        t = target_fn(M)
        loss = (max(b[0], b[2]) * max(0, -g1.valuation) + max(b[1], b[3]) * max(0, -g2.valuation)
                + max(0, -t.valuation))
        need = 2 * M + 2 * loss
        g1, g2 = gen_fn(need)
        try:
            return build_rational_rep(target_fn(need), g1, g2, b, precision=M + loss, **kw)
        except NoRepresentation:
            b = tuple(2 * v for v in b)
    raise NoRepresentation(f"no representation up to bounds {b}")
