"""JSON documents for modular polynomials and reports, plus the on-disk cache.

Documents are single-line JSON with sorted keys; every integer that can
grow (coefficients, curve data) is written as a decimal string.  The hash
covers the canonical text of the document without its "hash" field.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from . import __version__
from .algebra.poly import BivariatePolynomial
from .curve import EllipticCurve
from .modpoly import KINDS, ModularPolynomial

SCHEMA = "modparam.polynomial/1"
REPORT_SCHEMA = "modparam.report/1"


class DocumentError(ValueError):
    pass


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _hash(obj):
    body = {k: v for k, v in obj.items() if k != "hash"}
    return hashlib.sha256(canonical(body).encode()).hexdigest()


def seal(obj):
    """Attach the content hash and return the serialized line."""
    obj = dict(obj)
    obj["hash"] = _hash(obj)
    return canonical(obj) + "\n"


def curve_to_json(E):
    return {"ainvs": [str(a) for a in E.ainvs], "N": str(E.N), "label": E.label}


def curve_from_json(d):
    return EllipticCurve.from_list([int(a) for a in d["ainvs"]], int(d["N"]), d.get("label", ""))


def polynomial_to_json(M):
    terms = [[k, l, str(c)] for (k, l), c in sorted(M.poly.items())]
    return {
        "schema": SCHEMA,
        "curve": curve_to_json(M.curve),
        "kind": M.kind,
        "K": M.K,
        "L": M.L,
        "degree": M.degree,
        "precision": M.precision,
        "terms": terms,
    }


def dump_polynomial(M):
    return seal(polynomial_to_json(M))


def load_polynomial(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not a JSON document: {exc}") from exc
    if obj.get("schema") != SCHEMA:
        raise DocumentError(f"unsupported schema {obj.get('schema')!r}")
    if obj.get("hash") != _hash(obj):
        raise DocumentError("content hash mismatch")
    kind = obj["kind"]
    if kind not in KINDS:
        raise DocumentError(f"unknown kind {kind!r}")
    terms = obj["terms"]
    keys = [(k, l) for k, l, _ in terms]
    if keys != sorted(keys) or len(set(keys)) != len(keys):
        raise DocumentError("terms must be sorted by (k, l) without repeats")
    coeffs = {(k, l): int(c) for k, l, c in terms}
    if any(c == 0 for c in coeffs.values()):
        raise DocumentError("zero coefficient in terms")
    poly = BivariatePolynomial.from_dict(coeffs, KINDS[kind])
    if poly.degrees != (obj["K"], obj["L"]):
        raise DocumentError("stated degrees do not match the terms")
    E = curve_from_json(obj["curve"])
    return ModularPolynomial(kind, poly, obj["K"], obj["L"], E, obj["precision"], obj["degree"])


# -- cache ----------------------------------------------------------------------

def cache_dir(override=None):
    if override:
        return Path(override)
    env = os.environ.get("MODPARAM_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "modparam"


def cache_path(E, kind, directory=None):
    tag = "_".join(str(a) for a in E.ainvs)
    # F and f differ only in case, so spell the kind out for case-insensitive filesystems
    kname = {"F": "Fxj", "f": "fxJ", "G": "Gyj", "g": "gyJ"}[kind]
    return cache_dir(directory) / f"{tag}_N{E.N}_{kname}_v{__version__}.json"


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cache_load(E, kind, directory=None):
    p = cache_path(E, kind, directory)
    if not p.exists():
        return None
    M = load_polynomial(p.read_text(encoding="ascii"))
    if M.curve != E:
        raise DocumentError(f"cache file {p} belongs to another curve")
    return M


def cache_store(M, directory=None):
    p = cache_path(M.curve, M.kind, directory)
    atomic_write(p, dump_polynomial(M))
    return p
