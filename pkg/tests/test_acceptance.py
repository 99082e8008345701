"""Acceptance criteria 1-9, one test each.

Every test carries a ``criterion`` marker; tests/conftest.py prints one
PASS/FAIL line per criterion at the end of the run.  Run only these with

    pytest tests/test_acceptance.py -v

Printed constants below are the published values the computation has to
reproduce; nothing is read back from our own output.
"""

import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest

from modparam import analysis as A
from modparam.algebra.poly import BivariatePolynomial, UnivariatePolynomial
from modparam.analytic.eichler import eichler_gamma, lattice, phi_eval
from modparam.analytic.jfunc import eval_j
from modparam.analytic.modular import Cusp, Matrix2, cusp_equivalent, cusp_list, equivalent_points
from modparam.curve import EllipticCurve, l_value_at_1
from modparam.modpoly import (
    build_modular_polynomial,
    leading_coeff_in_j,
    leading_coeff_in_x,
    verify_relation,
)

HERE = Path(__file__).parent

criterion = pytest.mark.criterion


def poly(coeffs):
    return UnivariatePolynomial(coeffs)


def assemble(blocks, names):
    """sum_l blocks[l](u) v^l as a bivariate polynomial."""
    K = max(b.degree for b in blocks)
    grid = [[b[k] if k <= b.degree else 0 for b in blocks] for k in range(K + 1)]
    return BivariatePolynomial(grid, names)


def within(seconds, budget):
    assert seconds < budget, f"took {seconds:.0f} s, budget {budget} s"


E11 = EllipticCurve.from_list([0, -1, 1, -10, -20], 11, "11a1")
E37 = EllipticCurve.from_list([0, 0, 1, -1, 0], 37, "37a1")
E38 = EllipticCurve.from_list([1, 0, 1, 9, 90], 38, "38a1")
E40 = EllipticCurve.from_list([0, 0, 0, -7, -6], 40, "40a1")
E43 = EllipticCurve.from_list([0, 1, 1, 0, 0], 43, "43a1")
E46 = EllipticCurve.from_list([1, -1, 0, -10, -12], 46, "46a1")
E89 = EllipticCurve.from_list([1, 1, 1, -1, 0], 89, "89a1")
E91 = EllipticCurve.from_list([0, 1, 1, -7, 5], 91, "91b1")
E176 = EllipticCurve.from_list([0, 0, 0, -4, -4], 176, "176a1")


# -- 1, 2 --------------------------------------------------------------------------------

@criterion(1, "F11 reproduced coefficient for coefficient")
def test_criterion_1_F11():
    t = time.time()
    F = build_modular_polynomial(E11, "F")
    j2 = poly([16, -1]) ** 11
    j1 = poly([-104748564078368391, 199736619430410535, 159480622275659333,
               6839041777752481, -29669709666741936, -4074814667347831,
               1134855511654843, 164063633585170, 5072626276355,
               38323813979, 43119747, 1486])
    j0 = poly([9789217, 4971236, 1333262, -52820, 1]) ** 3
    assert F.poly == assemble([j0, j1, j2], ("x", "j"))
    within(time.time() - t, 10)


@criterion(2, "f11 reproduced coefficient for coefficient")
def test_criterion_2_f11():
    t = time.time()
    f = build_modular_polynomial(E11, "f")
    J2 = poly([16, -1])
    J1 = poly([6969, 5732, -12529, -6105, 1309, 297, -22])
    J0 = poly([97, 116, 62, -20, 1]) ** 3
    assert f.poly == assemble([J0, J1, J2], ("x", "J"))
    within(time.time() - t, 10)


# -- 3 -------------------------------------------------------------------------------------

@criterion(3, "L(37a1, 1) = 0 and F37 = f37")
def test_criterion_3_vanishing_l_value():
    t = time.time()
    L = l_value_at_1(E37, 128)
    assert abs(L.value) < mpmath.mpf(10) ** -20
    F = build_modular_polynomial(E37, "F")
    f = build_modular_polynomial(E37, "f")
    assert (F.K, F.L) == (f.K, f.L)
    assert F.poly.grid == f.poly.grid
    within(time.time() - t, 300)


# -- 4 -------------------------------------------------------------------------------------

F91B1 = [
    2 ** 15 * 5 ** 11 * 991 ** 3 * 16572269011 ** 3,
    -(2 ** 9) * 3 ** 4 * 5 ** 10 * 23 * 40341091849 * 788088043784206924489867,
    5 ** 6 * 248698909 * 269818358221989089513089057757,
    -(2 ** 7) * 3 ** 4 * 5 ** 4 * 49633 * 5413524016643,
    1048576,
]


@criterion(4, "fiber j-products: 37a1, 43a1, 89a1, 91b1")
def test_criterion_4_fiber_table():
    t = time.time()
    H7 = poly([3375, 1])
    H8 = poly([-8000, 1])
    assert A.fiber_j_product(E37, (0, 0)) == H7 ** 2
    assert A.fiber_j_product(E43, (0, 0)) == H7 ** 2
    assert A.fiber_j_product(E89, (0, 0)) == H8 ** 2
    got = A.fiber_j_product(E91, (-1, 3))
    assert got.leading_coefficient == 1048576
    assert got.coeffs[1:] == tuple(F91B1[1:])
    within(time.time() - t, 15 * 60)
    # the computed quartic vanishes at the j-values of the certified fiber points
    fib = A.fiber(E91, (-1, 3))
    assert len(fib.members) == 4
    with mpmath.workprec(512):
        for m in fib.members:
            assert m.residual < mpmath.mpf(2) ** -64
            scale = sum(abs(c) * abs(m.j) ** k for k, c in enumerate(got.coeffs))
            val = mpmath.polyval([mpmath.mpf(c) for c in reversed(got.coeffs)], m.j)
            assert abs(val) < mpmath.mpf(10) ** -30 * scale
    # The printed constant term 2^15 5^11 991^3 16572269011^3 is a tenth of
    # ours (2^16 5^12 ...); the other four coefficients agree.
    assert got == poly(F91B1)


# -- 5 -------------------------------------------------------------------------------------

TAU38 = ["-0.03335482984 + 0.0006179683j", "0.45453918428 + 0.0023009932j",
         "-0.12394615641 + 0.008571122j", "0.48150957905 + 0.0003798451j"]


def _mpc(text):
    re, im = text.replace(" ", "").rstrip("j").replace("+", " ").split()
    return mpmath.mpc(re, im)


@criterion(5, "N = 38: A60, four poles, gamma values, omega1")
def test_criterion_5_level38_poles():
    t = time.time()
    F = build_modular_polynomial(E38, "F")
    quartic = poly([256453780788797510341879944067, -5295752119436627969393180,
                    39952945838749259709, -4534998854, 1])
    assert leading_coeff_in_x(F) == quartic ** 2

    w1 = lattice(E38, 256).w1
    with mpmath.workprec(256):
        assert mpmath.nstr(w1.real, 20) == "1.8906322299422985362"
        assert abs(w1.imag) < mpmath.mpf(10) ** -60

    poles = A.noncusp_poles(E38, None, 256)
    assert len(poles) == 4
    tiny = mpmath.mpf(10) ** -20
    with mpmath.workprec(256):
        printed = [_mpc(s) for s in TAU38]
        lifted = []
        for tk in printed:
            hits = [(p, equivalent_points(p.tau, tk, 38, tol=mpmath.mpf(10) ** -5)) for p in poles]
            hits = [(p, M) for p, M in hits if M is not None]
            assert len(hits) == 1, f"printed point {tk} matches {len(hits)} poles"
            p, M = hits[0]
            lt = M.act(p.tau)
            # eight significant digits
            assert abs(lt - tk) < 5e-9 * abs(tk)
            lifted.append(lt)
        # the four printed points are four different points of X0(38)
        for i in range(4):
            for k in range(i + 1, 4):
                assert equivalent_points(lifted[i], lifted[k], 38) is None
        g = [eichler_gamma(E38, lt, 256) for lt in lifted]
        assert abs(g[0]) < tiny and abs(g[2]) < tiny
        assert abs(g[1] + w1) < tiny and abs(g[3] + w1) < tiny
    within(time.time() - t, 600)


# -- 6 -------------------------------------------------------------------------------------

def _cusp_set(fib):
    assert all(m.is_cusp for m in fib.members)
    return [m.point for m in fib.members]


def _same_cusps(found, printed, N):
    printed = [Cusp.parse(c) for c in printed]
    if len(found) != len(printed):
        return False
    return all(sum(1 for c in found if cusp_equivalent(c, p, N)[0]) == 1 for p in printed)


@criterion(6, "N = 40: bidegree (36, 2), F40(-3, j), cusp fibers")
def test_criterion_6_level40():
    t = time.time()
    F = build_modular_polynomial(E40, "F")
    assert (F.K, F.L) == (36, 2) and F.degree == 2
    for P, cusps in [((-2, 0), ["1/4", "1/8"]), ((3, 0), ["1", "1/2"]),
                     ((-1, 0), ["1/5", "1/10"]), (None, ["1/20", "1/40"])]:
        fib = A.fiber(E40, P)
        assert _same_cusps(_cusp_set(fib), cusps, 40), (P, [str(c) for c in _cusp_set(fib)])
        assert fib.total_multiplicity == 2
    within(time.time() - t, 600)
    # checked last so that a mismatch here does not hide the checks above.
    # The printed constant term differs from ours in one digit (...1141... vs
    # ...1144...); tests/test_analysis.py shows ours vanishes at the j-values
    # of the fiber over x = -3, the printed one does not.
    expected = [1073741824 * c for c in (1141195895676649024, 944485450025040, 847288609443)]
    assert F.poly.specialize_first(Fraction(-3)) == expected


# -- 7 -------------------------------------------------------------------------------------

@criterion(7, "N = 176: A_K = B_L = 1, 12 cusps to oo, defect 4")
def test_criterion_7_level176():
    t = time.time()
    # the full build takes minutes here, well inside the budget, so no cached document is used
    F = build_modular_polynomial(E176, "F", d=16)
    assert verify_relation(F)
    assert F.degree == 16
    assert leading_coeff_in_x(F) == poly([1])
    assert leading_coeff_in_j(F) == poly([1])
    assert len(cusp_list(176)) == 12
    vals = A.cusp_values(E176, {"F": F})
    assert len(vals) == 12 and all(v.point.is_infinity for v in vals.values())
    fib = A.fiber(E176, None, {"F": F})
    assert len(fib.members) == 12 and all(m.is_cusp for m in fib.members)
    # each cusp is counted once; the pole orders at cusps are not visible to F,
    # so sum(e) = 16 is reported as 12 members plus an unassigned defect of 4
    assert fib.degree == 16
    assert fib.defect == 4
    assert fib.total_multiplicity + fib.defect == 16
    assert any("defect 4" in n for n in fib.notes)
    within(time.time() - t, 2 * 3600)


# -- 8 -------------------------------------------------------------------------------------

U46 = [poly([-4, 1]), poly([4, 3, 1]), poly([3184, 2472, 567, -70, 23])]
V46 = [poly([2, 1]), poly([1996, -1004, 711, 14, 27]),
       poly([7416293824, 9784853696, -1586824496, -3448946432, 971389940, 12153116,
             7085747, 37030, 12167])]


def _is_root(P, z, tol):
    with mpmath.workprec(256):
        val = mpmath.polyval([mpmath.mpf(c) for c in reversed(P.coeffs)], z)
        scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(P.coeffs))
        return abs(val) <= tol * scale


@criterion(8, "N = 46: U, V factors, 8 ramification points, Substep-3.1 points")
def test_criterion_8_level46():
    t = time.time()
    rep = A.ramification_points(E46, None, 256)
    for Ui in U46:
        assert Ui.divides(rep.U), str(Ui)
    for Vi in V46:
        assert Vi.divides(rep.V), str(Vi)

    # exactly eight ramified non-cuspidal points, all over U3 x V3
    assert len(rep.points) == 8
    tol = mpmath.mpf(2) ** -100
    for p in rep.points:
        assert _is_root(U46[2], p.x.approx, tol) and _is_root(V46[2], p.y.approx, tol)
        assert p.fiber.is_ramified

    with mpmath.workprec(256):
        s7 = mpmath.sqrt(7)
        x1 = mpmath.mpc(-1.5, -s7 / 2)
        x2 = mpmath.mpc(-1.5, s7 / 2)
        y1 = mpmath.mpc(3.5, s7 / 2)
        y2 = mpmath.mpc(3.5, -s7 / 2)
    # the points of E over U1 * U2: y = -2 at x = 4, x1, x2 and the second
    # y-roots (x1, y1), (x2, y2); (4, -2) is a double root in y
    substep = [(4, -2), (x1, -2), (x2, -2), (x1, y1), (x2, y2)]
    for P in substep:
        fib = A.fiber(E46, P)
        assert not fib.is_ramified and len(fib.members) == 5, P
    fib = A.fiber(E46, (4, -2))
    assert _same_cusps([m.point for m in fib.members if m.is_cusp], ["1", "1/23"], 46)

    # the singular points: four distinct [tau_k] with j = J = -3375
    mats = [Matrix2(0, -1, 1, 0), Matrix2(0, -1, 1, 5), Matrix2(1, 14, 2, 29), Matrix2(1, 16, 2, 33)]
    targets = [(x1, -2), (x1, y1), (x2, y2), (x2, -2)]
    with mpmath.workprec(256):
        tau0 = (7 + mpmath.sqrt(-7)) / 4
        taus = [M.act(tau0) for M in mats]
        for i in range(4):
            for k in range(i + 1, 4):
                assert equivalent_points(taus[i], taus[k], 46) is None
        J = [eval_j(46 * tk, 256) for tk in taus]
        pts = [phi_eval(E46, tk, 256) for tk in taus]
        for tk in taus:
            assert abs(eval_j(tk, 256) + 3375) < 1e-40
        # tau_2, tau_3, tau_4 as printed
        for k in (1, 2, 3):
            assert abs(J[k] + 3375) < 1e-40
            (xt, yt), pt = targets[k], pts[k]
            assert abs(pt.x - xt) < 1e-30 and abs(pt.y - yt) < 1e-30
        # with M1 = (0, -1, 1, 3) the first point has J = -3375 and phi = (x1, -2)
        t1 = Matrix2(0, -1, 1, 3).act(tau0)
        assert abs(eval_j(46 * t1, 256) + 3375) < 1e-40
        p1 = phi_eval(E46, t1, 256)
        assert abs(p1.x - x1) < 1e-30 and abs(p1.y + 2) < 1e-30
        assert all(equivalent_points(t1, tk, 46) is None for tk in taus[1:])
    within(time.time() - t, 30 * 60)
    # the printed M1 = (0, -1, 1, 0) gives J(tau_1) = 5.27e23 and phi(tau_1) = (8.637..., 17.817...)
    assert abs(J[0] + 3375) < 1e-40, f"J(tau_1) = {mpmath.nstr(J[0], 12)}"


# -- 9 -------------------------------------------------------------------------------------

@criterion(9, "property suites")
def test_criterion_9_property_suites():
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        str(HERE / "test_properties.py")],
                       capture_output=True, text=True, cwd=HERE.parent)
    tail = "\n".join(r.stdout.strip().splitlines()[-3:])
    assert r.returncode == 0, tail


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
