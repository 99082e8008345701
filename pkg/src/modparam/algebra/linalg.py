"""Exact rational nullspaces.

Small systems use Gauss-Jordan elimination over Fraction.  Larger ones are
solved modulo 61-bit primes with flint's nmod_mat, combined by CRT and
lifted back by rational reconstruction.  The basis is always the one read
off the reduced echelon form (free column set to 1), so both routes give
the same vectors.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from math import gcd, isqrt, lcm

import flint

log = logging.getLogger(__name__)

MULTIMODULAR_THRESHOLD = 200


def _prime_stream(start=(1 << 61) - 1):
    p = start
    while True:
        while not flint.fmpz(p).is_prime():
            p -= 2
        yield p
        p -= 2


def primes_61(count, skip=0):
    it = _prime_stream()
    out = []
    for i, p in enumerate(it):
        if i >= skip:
            out.append(p)
        if len(out) == count:
            return out


class RationalMatrix:
    """rows x cols matrix of exact rationals (ints or Fractions)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, ncols=None):
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def transpose(self):
        return RationalMatrix([list(c) for c in zip(*self.rows)], self.nrows) if self.rows \
            else RationalMatrix([], 0)

    def hstack(self, other):
        if self.nrows != other.nrows:
            raise ValueError("row-count mismatch")
        return RationalMatrix([a + b for a, b in zip(self.rows, other.rows)],
                              self.ncols + other.ncols)

    def apply(self, v):
        return [sum(a * b for a, b in zip(r, v) if a and b) for r in self.rows]

    def mod(self, p):
        out = []
        for r in self.rows:
            out.append([_mod(c, p) for c in r])
        return flint.nmod_mat(self.nrows, self.ncols, [c for r in out for c in r], p) \
            if self.nrows else flint.nmod_mat(0, self.ncols, [], p)


def _mod(c, p):
    if isinstance(c, Fraction):
        return c.numerator * pow(c.denominator, -1, p) % p
    return int(c) % p


# -- exact elimination ---------------------------------------------------

def _rref_fraction(rows, ncols):
    A = [[Fraction(c) for c in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def _kernel_from_rref(R, pivots, ncols, one=1):
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [0 * one] * ncols
        v[f] = one
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][f]
        basis.append(v)
    return basis


def nullspace_mod_p(M):
    """Kernel basis of an nmod_mat and the pivot columns of its RREF.

    flint builds the basis from the RREF with each free column set to 1,
    so the free column of a vector is its last nonzero position.
    """
    n = M.ncols()
    X, k = M.nullspace()
    basis = [[int(X[i, j]) for i in range(n)] for j in range(k)]
    free = set()
    for v in basis:
        free.add(max(i for i in range(n) if v[i]))
    pivots = [c for c in range(n) if c not in free]
    return basis, pivots


def kernel_dimension_mod_p(M):
    return M.ncols() - M.rank()


def rational_reconstruct(a, m):
    """Find n/d = a mod m with |n|, d <= sqrt(m/2), or None."""
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or gcd(r1, abs(s1)) != 1:
        return None
    if s1 < 0:
        r1, s1 = -r1, -s1
    return Fraction(r1, s1)


def _lift_vectors(residues, modulus):
    """Rational reconstruction with a running common denominator."""
    out = []
    half = modulus // 2
    bound = isqrt(modulus // 2)
    for vec in residues:
        D = 1
        lifted = []
        for a in vec:
            r = a * D % modulus
            if r > half:
                r -= modulus
            if abs(r) <= bound:
                lifted.append(Fraction(r, D))
                continue
            f = rational_reconstruct(r, modulus)
            if f is None:
                return None
            lifted.append(f / D)
            D *= f.denominator
        out.append(lifted)
    return out


def _crt_pair(a, m, b, p):
    # x = a mod m, x = b mod p
    t = (b - a) * pow(m, -1, p) % p
    return a + m * t


def multimodular_kernel(reduce_mod, ncols, check=None, max_primes=400, extra=2):
    """Rational RREF kernel of a matrix given through its reductions.

    reduce_mod(p) returns the nmod_mat mod p (or None if p is bad for the
    input, e.g. divides a denominator).  Reconstruction stops once the lift
    is stable for `extra` further primes; check(vectors), when given, is
    the final exact certificate.
    """
    primes = _prime_stream()
    best = None         # (rank, pivots)
    residues = None
    modulus = 1
    stable = 0
    previous = None
    used = 0
    for p in primes:
        used += 1
        if used > max_primes:
            raise ArithmeticError("multimodular nullspace did not stabilise")
        M = reduce_mod(p)
        if M is None:
            continue
        basis, pivots = nullspace_mod_p(M)
        key = (len(pivots), tuple(pivots))
        if best is None or key[0] > best[0] or (key[0] == best[0] and key[1] < best[1]):
            if best is not None:
                log.debug("discarding %d unlucky primes", used - 1)
            best = key
            residues = basis
            modulus = p
            previous = None
            stable = 0
            if not basis:
                return []
            continue
        if key != best:
            continue
        residues = [[_crt_pair(a, modulus, b, p) for a, b in zip(va, vb)]
                    for va, vb in zip(residues, basis)]
        modulus *= p
        lifted = _lift_vectors(residues, modulus)
        if lifted is None:
            continue
        if lifted == previous:
            stable += 1
            if stable >= extra:
                if check is None or check(lifted):
                    log.debug("kernel of dim %d lifted with %d primes", len(lifted), used)
                    return lifted
                stable = 0
        else:
            stable = 0
        previous = lifted


def rational_nullspace(M, threshold=MULTIMODULAR_THRESHOLD):
    """Right nullspace basis of M with exact entries, from the RREF."""
    if not isinstance(M, RationalMatrix):
        M = RationalMatrix(M)
    n = M.ncols
    if n == 0:
        return []
    if M.nrows == 0:
        return [[Fraction(int(i == f)) for i in range(n)] for f in range(n)]
    if M.nrows < threshold:
        R, pivots = _rref_fraction(M.rows, n)
        return _kernel_from_rref(R, pivots, n, Fraction(1))
    dens = 1
    for r in M.rows:
        for c in r:
            if isinstance(c, Fraction) and c.denominator != 1:
                dens = lcm(dens, c.denominator)

    def reduce_mod(p):
        if dens % p == 0:
            return None
        return M.mod(p)

    def check(vectors):
        return all(not any(M.apply(v)) for v in vectors)

    return multimodular_kernel(reduce_mod, n, check)


def intersect_column_spaces(A, B, threshold=MULTIMODULAR_THRESHOLD):
    """Pairs (c, d) with A c = B d, from the kernel of [A | -B]."""
    if not isinstance(A, RationalMatrix):
        A = RationalMatrix(A)
    if not isinstance(B, RationalMatrix):
        B = RationalMatrix(B)
    if A.nrows != B.nrows:
        raise ValueError("row-count mismatch")
    negB = RationalMatrix([[-c for c in r] for r in B.rows], B.ncols)
    out = []
    for v in rational_nullspace(A.hstack(negB), threshold):
        c, d = v[:A.ncols], v[A.ncols:]
        if any(c) or any(d):
            out.append((c, d))
    return out


def primitive_integer_vector(v):
    """Scale a rational vector to coprime integers."""
    den = 1
    for c in v:
        den = lcm(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in v]
    g = 0
    for c in ints:
        g = gcd(g, c)
    return [c // g for c in ints] if g else ints
