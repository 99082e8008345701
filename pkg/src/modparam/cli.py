"""Command line entry point: modparam modpoly|fiber|poles|cusps|ramify|ratrep|hilbert."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from .algebra.series import LaurentSeries, generalized_eta_series, j_series
from .analysis import (
    DEFAULT_BITS,
    cusp_values,
    fiber,
    fiber_j_product,
    noncusp_poles,
    parse_number,
    ramification_points,
)
from .analytic.jfunc import hilbert_class_poly
from .curve import CurveError, EllipticCurve, taniyama_series
from .modpoly import (
    KernelTooSmall,
    ModularPolynomialError,
    NoRepresentation,
    ReducibleRelation,
    build_modular_polynomial,
    build_rational_rep_escalating,
    register,
    verify_relation,
)
from .serialize import (
    REPORT_SCHEMA,
    DocumentError,
    atomic_write,
    cache_load,
    cache_store,
    curve_to_json,
    dump_polynomial,
    seal,
)

log = logging.getLogger("modparam")

EXIT_OK = 0
EXIT_PRECISION = 2
EXIT_BAD_INPUT = 3
EXIT_BOUNDS = 4


class UsageError(ValueError):
    pass


# -- input parsing ------------------------------------------------------------

def parse_curve(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise UsageError("--curve expects a1,a2,a3,a4,a6,N")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"--curve entries must be integers: {text!r}") from None
    return EllipticCurve.from_list(vals[:5], vals[5])


def parse_point(text):
    if text.strip().lower() in ("oo", "inf", "infinity"):
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--point expects x,y or oo")
    return parts[0].strip(), parts[1].strip()


def parse_bounds(text):
    try:
        b = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--bounds entries must be integers: {text!r}") from None
    if len(b) != 4 or min(b) < 0:
        raise UsageError("--bounds expects four non-negative integers K,L,R,S")
    return b


# -- formatting helpers ----------------------------------------------------------

def _digits(bits):
    return max(15, int(bits * 0.30103) - 6)


def fmt_number(z, bits):
    """A real or complex number as decimal strings; rationals stay exact."""
    if isinstance(z, (int, Fraction)):
        return str(z)
    z = mpmath.mpc(z)
    n = _digits(bits)
    # components below the working accuracy are rounding noise
    z = mpmath.chop(z, mpmath.mpf(2) ** (-bits // 2) * max(1, abs(z)))
    if z.imag == 0:
        return mpmath.nstr(z.real, n)
    return [mpmath.nstr(z.real, n), mpmath.nstr(z.imag, n)]


def fmt_point(pt, bits):
    if pt.is_infinity:
        return "oo"
    return [fmt_number(pt.x, bits), fmt_number(pt.y, bits)]


def fmt_algebraic(a, bits):
    if a is None:
        return None
    if a.rational is not None:
        return str(a.rational)
    return {"poly": str(a.poly), "approx": fmt_number(a.approx, bits)}


def report(command, E, result):
    obj = {"schema": REPORT_SCHEMA, "version": __version__, "command": command, "result": result}
    if E is not None:
        obj["curve"] = curve_to_json(E)
    return seal(obj)


def emit(text, out):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def say(msg, args):
    # the summary moves to stderr when the JSON itself goes to stdout
    stream = sys.stdout if args.out else sys.stderr
    print(msg, file=stream)


# -- polynomials -------------------------------------------------------------------

def get_polynomial(E, kind, args):
    M = None
    if not args.no_cache:
        M = cache_load(E, kind, args.cache)
    if M is not None:
        if args.verify and not verify_relation(M):
            raise DocumentError(f"cached {kind}-polynomial fails its series relation")
        register(M)
        return M
    d = None
    if kind != "F" and args.degree is None:
        d = get_polynomial(E, "F", args).degree
    M = build_modular_polynomial(E, kind, d=args.degree or d)
    if not args.no_cache:
        cache_store(M, args.cache)
    return M


def polys_for(E, kinds, args):
    return {k: get_polynomial(E, k, args) for k in kinds}


# -- commands ----------------------------------------------------------------------

def cmd_modpoly(args):
    E = parse_curve(args.curve)
    M = get_polynomial(E, args.kind, args)
    text = dump_polynomial(M)
    emit(text, args.out)
    u, v = M.names
    say(f"{args.kind}: bidegree ({M.K}, {M.L}) in ({u}, {v}), degree {M.degree}, "
        f"{sum(1 for _ in M.poly.items())} terms, series precision {M.precision}", args)
    return EXIT_OK


def _fiber_json(res, bits):
    members = []
    for m in res.members:
        members.append({
            "point": str(m.point) if m.is_cusp else fmt_number(m.point, bits),
            "cusp": m.is_cusp,
            "j": None if m.j is None else fmt_number(m.j, bits),
            "multiplicity": str(m.multiplicity),
            "residual": mpmath.nstr(m.residual, 5),
        })
    return {
        "target": "oo" if res.target is None else [str(v) for v in res.target],
        "degree": res.degree,
        "members": members,
        "total_multiplicity": str(res.total_multiplicity),
        "ramified": res.is_ramified,
        "notes": res.notes,
    }


def cmd_fiber(args):
    E = parse_curve(args.curve)
    P = parse_point(args.point)
    polys = polys_for(E, "Ff", args)
    res = fiber(E, P, polys, args.bits)
    out = _fiber_json(res, args.bits)
    if P is not None and isinstance(parse_number(P[0]), Fraction):
        out["j_product"] = str(fiber_j_product(E, P, polys, args.bits))
    emit(report("fiber", E, out), args.out)
    say(f"fiber over {args.point}: {len(res.members)} point(s) of X0({E.N}), degree {res.degree}", args)
    if "j_product" in out:
        say(f"j-product: {out['j_product']}", args)
    for n in res.notes:
        say(f"note: {n}", args)
    return EXIT_OK


def cmd_poles(args):
    E = parse_curve(args.curve)
    polys = polys_for(E, "F", args)
    poles = noncusp_poles(E, polys, args.bits)
    out = [{"tau": fmt_number(p.tau, args.bits), "j": fmt_number(p.j, args.bits),
            "lattice_point": list(p.lattice_point)} for p in poles]
    emit(report("poles", E, {"poles": out}), args.out)
    say(f"{len(poles)} non-cuspidal pole(s) of x on X0({E.N})", args)
    return EXIT_OK


def cmd_cusps(args):
    E = parse_curve(args.curve)
    polys = polys_for(E, "F", args)
    # G is needed for exact y-values only when some cusp has a finite image
    if args.with_g or polys["F"].leading_coeff_in_j().degree >= 1:
        polys = polys_for(E, "FG", args)
    cv = cusp_values(E, polys, args.bits)
    rows = []
    for c in sorted(cv, key=lambda c: (c.r, c.s)):
        v = cv[c]
        rows.append({"cusp": str(c), "value": fmt_point(v.point, args.bits),
                     "x": fmt_algebraic(v.x, args.bits), "y": fmt_algebraic(v.y, args.bits)})
    emit(report("cusps", E, {"cusps": rows}), args.out)
    at_inf = sum(1 for v in cv.values() if v.point.is_infinity)
    say(f"{len(cv)} cusp(s); {at_inf} map to oo", args)
    return EXIT_OK


def cmd_ramify(args):
    E = parse_curve(args.curve)
    polys = polys_for(E, "FfGg", args)
    rep = ramification_points(E, polys, args.bits)
    pts = [{"x": fmt_algebraic(p.x, args.bits), "y": fmt_algebraic(p.y, args.bits),
            "fiber": _fiber_json(p.fiber, args.bits)} for p in rep.points]
    rejected = [{"x": fmt_algebraic(x, args.bits), "y": fmt_algebraic(y, args.bits),
                 "fiber_size": len(f.members)} for x, y, f in rep.unramified]
    flags = [{"value": str(v), "defect": k, "cusps": [str(c) for c in cs]}
             for v, k, cs in rep.cusp_flags]
    out = {"U": str(rep.U), "V": str(rep.V), "ramified": pts, "unramified": rejected,
           "cusp_flags": flags}
    emit(report("ramify", E, out), args.out)
    say(f"U = {rep.U}", args)
    say(f"V = {rep.V}", args)
    say(f"{len(rep.points)} ramified non-cuspidal point(s), {len(rep.unramified)} candidate(s) rejected", args)
    for f in flags:
        say(f"cusp value {f['value']}: defect {f['defect']} (external criterion required)", args)
    return EXIT_OK


def _series_from_file(path):
    data = json.loads(Path(path).read_text())
    coeffs = [Fraction(c) for c in data["coeffs"]]
    v = int(data["valuation"])
    prec = int(data.get("prec", v + len(coeffs)))
    return LaurentSeries(v, coeffs, prec)


def _eta_quotient(N, spec, M):
    """E_{g1} E_{g2} ... / (E_{h1} ...) at level N, from 'g1,g2,.../h1,...'."""
    num, _, den = spec.partition("/")
    gs = [int(g) for g in num.split(",") if g.strip()]
    hs = [int(h) for h in den.split(",") if h.strip()]
    s = LaurentSeries.constant(1, M + 1)
    for g in gs:
        s = s * generalized_eta_series(N, g, M)
    for h in hs:
        s = s / generalized_eta_series(N, h, M)
    return s.drop_shift()


def generator(E, name, M):
    """The q-expansion of a named generator, known at least to q^M."""
    if name == "j":
        return j_series(M)
    if name == "J":
        return j_series(M // E.N + 1).subs_qpow(E.N).truncate(M + 1)
    if name in ("x", "y"):
        t = taniyama_series(E, M + 4)
        return t.xq if name == "x" else t.yq
    if name.startswith("eta:"):
        return _eta_quotient(E.N, name[4:], M + 8)
    if name.startswith("file:"):
        return _series_from_file(name[5:])
    raise UsageError(f"unknown generator {name!r}")


def cmd_ratrep(args):
    E = parse_curve(args.curve)
    if not args.bounds:
        raise UsageError("ratrep needs --bounds K,L,R,S")
    g1, g2 = (s.strip() for s in args.generators.split(";" if ";" in args.generators else ","))
    bounds = parse_bounds(args.bounds)
    rep = build_rational_rep_escalating(
        lambda M: generator(E, args.target, M),
        lambda M: (generator(E, g1, M), generator(E, g2, M)),
        bounds, names=("X", "Y"), target_name=args.target)
    out = {"target": args.target, "generators": [g1, g2], "bounds": list(rep.bounds),
           "P": str(rep.P), "Q": str(rep.Q), "precision": rep.precision}
    emit(report("ratrep", E, out), args.out)
    say(f"{args.target} = P(X, Y)/Q(X, Y) with X = {g1}, Y = {g2}, bounds {rep.bounds}", args)
    say(f"P = {rep.P}", args)
    say(f"Q = {rep.Q}", args)
    return EXIT_OK


def cmd_hilbert(args):
    try:
        D = int(args.discriminant)
    except ValueError:
        raise UsageError("discriminant must be an integer") from None
    H = hilbert_class_poly(D, args.bits)
    emit(report("hilbert", None, {"D": str(D), "H": str(H),
                                  "coeffs": [str(c) for c in H.coeffs]}), args.out)
    say(f"H_{D}(x) = {H}", args)
    return EXIT_OK


COMMANDS = {
    "modpoly": cmd_modpoly,
    "fiber": cmd_fiber,
    "poles": cmd_poles,
    "cusps": cmd_cusps,
    "ramify": cmd_ramify,
    "ratrep": cmd_ratrep,
    "hilbert": cmd_hilbert,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bits", type=int, default=DEFAULT_BITS, help="working precision in bits")
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--cache", help="cache directory (default $MODPARAM_CACHE or ~/.cache/modparam)")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("--verify", action="store_true",
                        help="re-verify the series relation of cached polynomials on load")
    common.add_argument("--degree", type=int, help="degree of the parametrization, if known")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="modparam", description=__doc__)
    p.add_argument("--version", action="version", version=f"modparam {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def with_curve(name, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--curve", required=True, help="a1,a2,a3,a4,a6,N")
        return s

    s = with_curve("modpoly", "build a modular polynomial F, f, G or g")
    s.add_argument("--kind", choices=["F", "f", "G", "g"], default="F")
    s = with_curve("fiber", "points of X0(N) over a point of E")
    s.add_argument("--point", required=True, help="x,y (rationals, decimals or sqrt expressions) or oo")
    with_curve("poles", "non-cuspidal poles of x")
    s = with_curve("cusps", "phi at every cusp")
    s.add_argument("--with-g", action="store_true", help="build G even when every cusp maps to oo")
    with_curve("ramify", "ramification points of phi")
    s = with_curve("ratrep", "x or y as a rational function of two generators")
    s.add_argument("--target", choices=["x", "y"], default="x")
    s.add_argument("--generators", default="j,J",
                   help="two of j, J, x, y, eta:g1,../h1,.. or file:path.json, separated by ';' "
                        "(or ',' for simple names)")
    s.add_argument("--bounds", help="K,L,R,S")
    s = sub.add_parser("hilbert", parents=[common], help="Hilbert class polynomial H_D")
    s.add_argument("discriminant", help="negative discriminant D")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CurveError, DocumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (KernelTooSmall, ReducibleRelation, NoRepresentation) as exc:
        print(f"error: {exc}; retry with larger bounds (--degree or --bounds)", file=sys.stderr)
        return EXIT_BOUNDS
    except (ModularPolynomialError, ArithmeticError) as exc:
        print(f"error: {exc}; precision exhausted (raise --bits)", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
