"""Modular polynomials F, f, G, g and rational representations."""

import mpmath
import pytest

from modparam.algebra.poly import BivariatePolynomial, UnivariatePolynomial
from modparam.algebra.series import j_series
from modparam.analysis import discriminant_factor
from modparam.analytic.eichler import phi_eval
from modparam.analytic.jfunc import eval_j
from modparam.curve import EllipticCurve, taniyama_series
from modparam.modpoly import (
    KernelTooSmall,
    ModularPolynomial,
    NoRepresentation,
    SeriesSource,
    build_modular_polynomial,
    build_rational_rep,
    build_rational_rep_escalating,
    degree_bounds,
    find_bidegree_unbounded_L,
    kernel_dimension,
    leading_coeff_in_j,
    leading_coeff_in_x,
    verify_rational_rep,
    verify_relation,
)

E11 = EllipticCurve.from_list([0, -1, 1, -10, -20], 11, "11a1")
E37 = EllipticCurve.from_list([0, 0, 1, -1, 0], 37, "37a1")

P = 1000003


@pytest.fixture(scope="module")
def F11():
    return build_modular_polynomial(E11, "F")


def test_f11_bidegree_and_degree(F11):
    assert (F11.K, F11.L) == (12, 2)
    assert F11.degree == 1
    mu, d, K0, L0 = degree_bounds(E11, 1)
    assert F11.K <= K0 and F11.L <= L0


def test_f11_leading_coefficients(F11):
    assert leading_coeff_in_j(F11) == UnivariatePolynomial([16, -1]) ** 11
    # A_K(j) is the constant x^12 coefficient; it is a unit up to sign
    A = leading_coeff_in_x(F11)
    assert A.degree == 0


def test_bidegree_is_minimal(F11):
    src = SeriesSource(E11, "F")
    assert kernel_dimension(src, 12, 2, P) == 1
    assert kernel_dimension(src, 11, 2, P) == 0
    assert kernel_dimension(src, 12, 1, P) == 0


def test_relation_holds_analytically(F11):
    # independent route: F(x(tau), j(tau)) with x from the Weierstrass side
    with mpmath.workprec(200):
        for tau in (mpmath.mpc("0.13", "0.41"), mpmath.mpc("-0.31", "0.27")):
            pt = phi_eval(E11, tau, 200)
            j = eval_j(tau, 200)
            val = abs(F11.poly(pt.x, j))
            scale = sum(abs(c) * abs(pt.x) ** k * abs(j) ** l for (k, l), c in F11.poly.items())
            assert val < mpmath.mpf(2) ** -120 * scale


def test_perturbed_relation_fails_verification(F11):
    d = F11.poly.to_dict()
    d[(0, 0)] += 1
    bad = ModularPolynomial("F", BivariatePolynomial.from_dict(d, ("x", "j")), F11.K, F11.L,
                            E11, F11.precision, F11.degree)
    assert verify_relation(F11)
    assert not verify_relation(bad)


def test_f11_is_squarefree_in_j(F11):
    # irreducibility proxy: the discriminant in j does not vanish identically
    assert not discriminant_factor(F11).is_zero()


def test_other_kinds_11a1(F11):
    f = build_modular_polynomial(E11, "f")
    assert (f.K, f.L) == (12, 2)
    assert verify_relation(f)
    G = build_modular_polynomial(E11, "G")
    assert verify_relation(G)
    assert G.L <= 3 * F11.degree


def test_vanishing_l_value_gives_equal_f_and_F():
    F = build_modular_polynomial(E37, "F")
    f = build_modular_polynomial(E37, "f")
    assert F.degree == 2
    assert F.poly.grid == f.poly.grid


def test_wrong_conductor_stops_at_cap():
    E = EllipticCurve.from_list([0, -1, 1, -10, -20], 13)
    src = SeriesSource(E, "F")
    with pytest.raises(KernelTooSmall):
        find_bidegree_unbounded_L(src, 4, P, L_cap=4)


def test_unknown_kind():
    with pytest.raises(ValueError):
        build_modular_polynomial(E11, "H")


# -- rational representations -------------------------------------------------

def _x_series(M):
    return taniyama_series(E11, M + 2).xq.truncate(M)


def _y_series(M):
    return taniyama_series(E11, M + 2).yq.truncate(M)


def test_identity_representation():
    j = j_series(80)
    rep = build_rational_rep(j, j, j, (1, 0, 0, 0))
    assert rep.P.to_dict() == {(1, 0): 1} and rep.Q.to_dict() == {(0, 0): 1}


def test_y_in_terms_of_x_and_j():
    # for 11a1, C(X0(11)) = C(x, j), so y is a rational function of x and j;
    # the bounds must be escalated once from (2, 1, 2, 1)
    def gens(M):
        return _x_series(M), j_series(M)

    rep = build_rational_rep_escalating(_y_series, gens, (2, 1, 2, 1))
    assert rep.bounds[0] >= 4
    x, j = gens(200)
    assert verify_rational_rep(rep, _y_series(200), x, j)
    # independent analytic check at a point of the upper half-plane
    with mpmath.workprec(200):
        tau = mpmath.mpc("0.21", "0.33")
        pt = phi_eval(E11, tau, 200)
        jv = eval_j(tau, 200)
        val = rep.P(pt.x, jv) / rep.Q(pt.x, jv)
        assert abs(val - pt.y) < mpmath.mpf(2) ** -100 * (1 + abs(pt.y))


def test_no_representation_signal():
    j = j_series(60)
    x = _x_series(60)
    with pytest.raises(NoRepresentation):
        build_rational_rep(x, j, j, (1, 0, 1, 0))
