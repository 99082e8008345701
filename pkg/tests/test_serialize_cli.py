"""Documents, the cache and the command line."""

import json

import pytest

from modparam import cli
from modparam.curve import EllipticCurve
from modparam.modpoly import build_modular_polynomial
from modparam.serialize import (
    DocumentError,
    cache_path,
    canonical,
    dump_polynomial,
    load_polynomial,
    seal,
)

C11 = "0,-1,1,-10,-20,11"
C37 = "0,0,1,-1,0,37"
E11 = EllipticCurve.from_list([0, -1, 1, -10, -20], 11)


@pytest.fixture(scope="module")
def doc11():
    return dump_polynomial(build_modular_polynomial(E11, "F"))


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# -- documents ------------------------------------------------------------------------

def test_polynomial_roundtrip_is_byte_identical(doc11):
    M = load_polynomial(doc11)
    assert dump_polynomial(M) == doc11
    assert M.poly == build_modular_polynomial(E11, "F").poly


def test_document_layout(doc11):
    obj = json.loads(doc11)
    assert doc11.count("\n") == 1 and doc11.endswith("\n")
    assert obj["schema"] == "modparam.polynomial/1"
    assert all(isinstance(c, str) for _, _, c in obj["terms"])
    keys = [(k, l) for k, l, _ in obj["terms"]]
    assert keys == sorted(keys)
    # the j^2 block is (16 - x)^11, whose constant term is 16^11
    assert [c for k, l, c in obj["terms"] if (k, l) == (0, 2)] == [str(16 ** 11)]


def test_hash_detects_tampering(doc11):
    obj = json.loads(doc11)
    obj["terms"][0][2] = str(int(obj["terms"][0][2]) + 1)
    with pytest.raises(DocumentError, match="hash"):
        load_polynomial(canonical(obj))


def test_structural_checks(doc11):
    obj = json.loads(doc11)
    obj.pop("hash")
    bad = dict(obj, terms=list(reversed(obj["terms"])))
    with pytest.raises(DocumentError, match="sorted"):
        load_polynomial(seal(bad))
    bad = dict(obj, terms=obj["terms"] + [[99, 0, "0"]])
    with pytest.raises(DocumentError):
        load_polynomial(seal(bad))
    with pytest.raises(DocumentError, match="schema"):
        load_polynomial(seal(dict(obj, schema="other/1")))
    with pytest.raises(DocumentError):
        load_polynomial("not json")


def test_report_roundtrip(capsys):
    code, out, _ = run(["hilbert", "-20"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert seal({k: v for k, v in obj.items() if k != "hash"}) == out
    assert canonical(obj) + "\n" == out


# -- CLI -----------------------------------------------------------------------------

def test_hilbert_minus_7(capsys):
    code, out, err = run(["hilbert", "-7"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["H"] == "x + 3375"
    assert "x + 3375" in err


def test_hilbert_bad_discriminant(capsys):
    code, _, err = run(["hilbert", "-5"], capsys)
    assert code == cli.EXIT_BAD_INPUT and "error" in err


def test_modpoly_cache_hit_is_byte_identical(tmp_path, capsys):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    cache = tmp_path / "cache"
    assert cli.main(["modpoly", "--curve", C11, "--cache", str(cache), "--out", str(out1)]) == 0
    assert cache_path(E11, "F", cache).exists()
    assert cli.main(["modpoly", "--curve", C11, "--cache", str(cache), "--out", str(out2),
                     "--verify"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    obj = json.loads(out1.read_text())
    assert (obj["K"], obj["L"]) == (12, 2)
    capsys.readouterr()


def test_cache_env_variable(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MODPARAM_CACHE", str(tmp_path))
    assert cli.main(["modpoly", "--curve", C11]) == 0
    assert cache_path(E11, "F").parent == tmp_path
    assert cache_path(E11, "F").exists()
    capsys.readouterr()


def test_verify_rejects_resealed_wrong_polynomial(tmp_path, doc11, capsys):
    # a document with a valid hash but a wrong coefficient passes parsing and
    # must be caught by the series relation
    obj = json.loads(doc11)
    obj.pop("hash")
    obj["terms"][0][2] = str(int(obj["terms"][0][2]) + 1)
    p = cache_path(E11, "F", tmp_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(seal(obj))
    code, _, err = run(["modpoly", "--curve", C11, "--cache", str(tmp_path), "--verify"], capsys)
    assert code == cli.EXIT_BAD_INPUT and "series relation" in err


def test_singular_curve_exit_code(capsys):
    code, out, err = run(["modpoly", "--curve", "0,0,0,0,0,11"], capsys)
    assert code == cli.EXIT_BAD_INPUT and out == ""
    code, _, _ = run(["modpoly", "--curve", "1,2,3"], capsys)
    assert code == cli.EXIT_BAD_INPUT


def test_fiber_37a1_reports_h7_squared(capsys):
    code, out, err = run(["fiber", "--curve", C37, "--point", "0,0", "--no-cache"], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["j_product"] == "x^2 + 6750*x + 11390625"   # (x + 3375)^2
    assert res["degree"] == 2 and len(res["members"]) == 2
    assert "j-product" in err


def test_cusps_11a1(capsys):
    code, out, _ = run(["cusps", "--curve", C11, "--no-cache"], capsys)
    assert code == 0
    rows = {r["cusp"]: r for r in json.loads(out)["result"]["cusps"]}
    assert rows["1/11"]["value"] == "oo"
    assert (rows["1"]["x"], rows["1"]["y"]) == ("16", "-61")


def test_ratrep_y_from_x_and_j(capsys):
    code, out, _ = run(["ratrep", "--curve", C11, "--target", "y", "--generators", "x,j",
                        "--bounds", "6,1,6,1", "--no-cache"], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["bounds"] == [6, 1, 6, 1] and res["P"] and res["Q"]


def test_ratrep_exhausted_bounds_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "build_rational_rep_escalating",
                        lambda *a, **k: (_ for _ in ()).throw(cli.NoRepresentation("none")))
    code, _, err = run(["ratrep", "--curve", C11, "--bounds", "1,0,1,0"], capsys)
    assert code == cli.EXIT_BOUNDS and "larger bounds" in err


def test_precision_exhausted_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("rounding did not settle")
    monkeypatch.setattr(cli, "hilbert_class_poly", boom)
    code, _, err = run(["hilbert", "-7"], capsys)
    assert code == cli.EXIT_PRECISION and "--bits" in err


def test_bad_bounds_and_point(capsys):
    assert run(["ratrep", "--curve", C11, "--bounds", "1,2"], capsys)[0] == cli.EXIT_BAD_INPUT
    assert run(["fiber", "--curve", C11, "--point", "1"], capsys)[0] == cli.EXIT_BAD_INPUT
