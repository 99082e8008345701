"""j, periods, the Weierstrass functions, Gamma0(N) combinatorics and gamma."""

from fractions import Fraction

import mpmath
import pytest

from modparam.algebra.poly import UnivariatePolynomial
from modparam.analytic.eichler import (
    eichler_gamma,
    gamma_at_cusp_coordinates,
    phi_eval,
    point_from_z,
)
from modparam.analytic.jfunc import (
    class_number,
    eval_j,
    hilbert_class_poly,
    reduced_forms,
    tau_from_j,
)
from modparam.analytic.lattice import lattice_invariants, periods
from modparam.analytic.modular import (
    Cusp,
    Matrix2,
    coset_reps,
    cusp_count,
    cusp_equivalent,
    cusp_list,
    cusp_width,
    equivalent_points,
    reduce_to_fundamental_domain,
)
from modparam.curve import EllipticCurve, gamma0_index

E11 = EllipticCurve.from_list([0, -1, 1, -10, -20], 11, "11a1")
E38 = EllipticCurve.from_list([1, 0, 1, 9, 90], 38, "38a1")
E40 = EllipticCurve.from_list([0, 0, 0, -7, -6], 40, "40a1")


# -- j ---------------------------------------------------------------------------

def test_eval_j_special_values():
    with mpmath.workprec(256):
        assert abs(eval_j(1j) - 1728) < mpmath.mpf(2) ** -200
        assert abs(eval_j(mpmath.mpc(-0.5, mpmath.sqrt(3) / 2))) < mpmath.mpf(2) ** -200
        assert abs(eval_j((-1 + mpmath.sqrt(-7)) / 2) + 3375) < mpmath.mpf(2) ** -200


def test_eval_j_keeps_requested_precision_without_ambient_context():
    # the default mpmath context is 53 bits; results must not be rounded to it
    with mpmath.workprec(256):
        tau = (1 + mpmath.sqrt(-163)) / 2
    v = eval_j(tau, 256)
    with mpmath.workprec(256):
        err = abs(v + mpmath.mpf(640320) ** 3)
    assert err < mpmath.mpf(2) ** -100


def test_tau_from_j_lands_in_fundamental_domain():
    with mpmath.workprec(256):
        t = tau_from_j(-3375)
        assert abs(t.real) <= 0.5 and abs(t) >= 1 - 1e-30
        assert abs(t - (-1 + mpmath.sqrt(-7)) / 2) < mpmath.mpf(2) ** -200


def test_hilbert_class_polynomials():
    assert hilbert_class_poly(-7) == UnivariatePolynomial([3375, 1])
    assert hilbert_class_poly(-4) == UnivariatePolynomial([-1728, 1])
    assert hilbert_class_poly(-8) == UnivariatePolynomial([-8000, 1])
    assert class_number(-23) == 3


def test_hilbert_d20_roots_are_reduced_form_values():
    H = hilbert_class_poly(-20)
    assert H.degree == 2
    with mpmath.workprec(200):
        for a, b, _ in reduced_forms(-20):
            r = eval_j((-b + mpmath.sqrt(-20)) / (2 * a), 200)
            val = mpmath.polyval([mpmath.mpf(c) for c in reversed(H.coeffs)], r)
            assert abs(val) < mpmath.mpf(10) ** -20 * (1 + abs(r)) ** 2


def test_reduced_forms_rejects_non_discriminant():
    with pytest.raises(ValueError):
        reduced_forms(-5)
    with pytest.raises(ValueError):
        reduced_forms(8)


# -- periods and Weierstrass functions ------------------------------------------------

def test_omega1_38a1():
    w1 = periods(E38, 256).w1
    with mpmath.workprec(256):
        assert mpmath.nstr(w1.real, 20) == "1.8906322299422985362"
        assert abs(w1.imag) < mpmath.mpf(2) ** -200


def test_omega1_11a1():
    w1 = periods(E11, 256).w1
    with mpmath.workprec(256):
        assert abs(w1 - mpmath.mpf("1.2692093042795534216887946167545473052194922")) < 1e-40


@pytest.mark.parametrize("E", [E11, E38, E40], ids=["11a1", "38a1", "40a1"])
def test_lattice_invariants_match_c4_c6(E):
    L = periods(E, 256)
    g2, g3 = lattice_invariants(L, 256)
    with mpmath.workprec(256):
        assert abs(g2 - mpmath.mpf(E.c4) / 12) < mpmath.mpf(2) ** -150 * abs(E.c4)
        assert abs(g3 - mpmath.mpf(E.c6) / 216) < mpmath.mpf(2) ** -150 * (1 + abs(E.c6))


def test_point_from_z_lies_on_curve():
    z = mpmath.mpc("0.3", "0.2")
    P = point_from_z(E11, z, 256)
    with mpmath.workprec(256):
        assert abs(E11.equation(P.x, P.y)) < mpmath.mpf(2) ** -150 * (1 + abs(P.y)) ** 2
    assert point_from_z(E11, periods(E11, 256).w1, 256).is_infinity


# -- Gamma0(N) ----------------------------------------------------------------

@pytest.mark.parametrize("N", [11, 12, 40, 46])
def test_coset_reps_are_distinct_classes(N):
    reps = coset_reps(N)
    assert len(reps) == gamma0_index(N)
    for i, A in enumerate(reps):
        assert A.det == 1
        for B in reps[i + 1:]:
            assert not (A @ B.inverse()).in_gamma0(N)


@pytest.mark.parametrize("N,count", [(11, 2), (38, 4), (40, 8), (46, 4), (176, 12)])
def test_cusp_counts(N, count):
    assert cusp_count(N) == count
    cs = cusp_list(N)
    assert len(cs) == count
    # representatives are pairwise inequivalent
    for i, a in enumerate(cs):
        for b in cs[i + 1:]:
            assert not cusp_equivalent(a, b, N)[0]
    # widths sum to the index
    assert sum(cusp_width(c, N) for c in cs) == gamma0_index(N)


def test_cusp_equivalence_witness():
    ok, M = cusp_equivalent(Cusp.parse("1/4"), Cusp.parse("3/4"), 8)
    a, b, c, d = M
    assert ok and c % 8 == 0 and a * d - b * c == 1
    # the witness maps the second cusp to the first
    assert Fraction(a * 3 + b * 4, c * 3 + d * 4) == Fraction(1, 4)
    assert not cusp_equivalent(Cusp.parse("1/2"), Cusp.parse("1/4"), 8)[0]


def test_reduce_to_fundamental_domain():
    with mpmath.workprec(128):
        t, M = reduce_to_fundamental_domain(mpmath.mpc("0.37", "0.0021"))
        assert abs(t.real) <= 0.5 and abs(t) >= 1
        assert abs(M.act(mpmath.mpc("0.37", "0.0021")) - t) < 1e-30


def test_equivalent_points_finds_gamma0_witness():
    M = Matrix2(3, 1, 11, 4)
    with mpmath.workprec(128):
        t = mpmath.mpc("0.1", "0.7")
        W = equivalent_points(t, M.act(t), 11)
        assert W is not None and W[2] % 11 == 0
        assert abs(W.act(t) - M.act(t)) < 1e-25
        # S is not in Gamma0(11), and 0.1 + 0.7i is not an elliptic point
        assert equivalent_points(t, Matrix2(0, -1, 1, 0).act(t), 11) is None


# -- gamma and phi ----------------------------------------------------------------

def test_gamma_small_imaginary_part_uses_translates():
    # Im(M tau) is about 0.004 < 1/(10 N), so the translate path is taken;
    # gamma(M tau) - gamma(tau) must still be a period
    M = Matrix2(2, 1, 11, 6)
    with mpmath.workprec(200):
        t = mpmath.mpc("0.3", "0.5")
        assert M.act(t).imag < mpmath.mpf(1) / 110
        g1 = eichler_gamma(E11, M.act(t), 160)
        g0 = eichler_gamma(E11, t, 160)
        L = periods(E11, 160)
        assert L.snap(g1 - g0, mpmath.mpf(2) ** -100) is not None


def test_cusp_value_40a1():
    # [1/4] maps to the 2-torsion point (-2, 0)
    P = phi_eval(E40, Cusp.parse("1/4"), 256)
    with mpmath.workprec(256):
        assert abs(P.x + 2) < mpmath.mpf(2) ** -100
        assert abs(P.y) < mpmath.mpf(2) ** -100
    m, n = gamma_at_cusp_coordinates(E40, Cusp.parse("1/4"), 256)
    assert (2 * m).denominator == 1 and (2 * n).denominator == 1


def test_phi_at_infinity_cusp():
    assert phi_eval(E11, Cusp.parse("oo"), 128).is_infinity
