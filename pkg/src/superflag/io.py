"""Exact JSON serialization of supertranslation-algebra presentations.

File format (``"format": "superflag-algebra"``, version 1)::

    {
      "format": "superflag-algebra",
      "version": 1,
      "name": "MIN_TWIST",
      "n_odd": 10,
      "n_even": 5,
      "gamma": [[0, 1, 2, "3/2"], ...],
      "declared_dim_Y": 23,
      "p0_action": [{"odd": [["1", "0"], ...], "even": [["0"]]}, ...],
      "q_vectors": {"minimal": ["1", "0", ...]}
    }

Every coefficient is an exact rational, serialized as a string ("3/2") or a
JSON integer.  Floats are rejected: the engine works over Q and a float in
the input is always a mistake.  ``declared_dim_Y``, ``p0_action`` and
``q_vectors`` are optional.  Serialization is deterministic (sorted keys,
gamma rows sorted by (mu, alpha, beta)) so that files and reports are
byte-for-byte reproducible; parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .superalgebra import SuperTranslationAlgebra

FORMAT_NAME = "superflag-algebra"
FORMAT_VERSION = 1

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


class AlgebraFileError(ValueError):
    """Malformed algebra file; message carries source, line, and field."""

    def __init__(self, message: str, source: str = "<string>",
                 line: Optional[int] = None, fieldname: Optional[str] = None):
        self.source = source
        self.line = line
        self.fieldname = fieldname
        where = source if line is None else f"{source}:{line}"
        at = f" (field {fieldname})" if fieldname else ""
        super().__init__(f"{where}: {message}{at}")


@dataclass(frozen=True)
class AlgebraFile:
    """A parsed algebra presentation plus optional named twist vectors."""

    algebra: SuperTranslationAlgebra
    q_vectors: dict = field(default_factory=dict)  # name -> tuple of mpq


def parse_rational(value, fieldname: str, source: str = "<string>") -> mpq:
    """Exact rational from a JSON value: int, or string 'a/b' / 'a'."""
    if isinstance(value, bool):
        raise AlgebraFileError("expected a rational, got a boolean",
                               source, fieldname=fieldname)
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, float):
        raise AlgebraFileError(
            f"floats are not exact; write the rational as a string: {value!r}",
            source, fieldname=fieldname)
    if isinstance(value, str):
        if not _RATIONAL_RE.match(value.strip()):
            raise AlgebraFileError(
                f"not a rational literal: {value!r} (expected 'a' or 'a/b')",
                source, fieldname=fieldname)
        return mpq(value.strip())
    raise AlgebraFileError(f"expected a rational, got {type(value).__name__}",
                           source, fieldname=fieldname)


def format_rational(value: mpq):
    """JSON value for an exact rational: int when integral, else 'a/b'."""
    value = mpq(value)
    if value.denominator == 1:
        return int(value.numerator)
    return str(value)


def _require(obj: dict, key: str, types, source: str, optional: bool = False):
    if key not in obj:
        if optional:
            return None
        raise AlgebraFileError(f"missing required key {key!r}", source,
                               fieldname=key)
    val = obj[key]
    if isinstance(val, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise AlgebraFileError(f"key {key!r} has wrong type bool", source,
                               fieldname=key)
    if not isinstance(val, types):
        raise AlgebraFileError(
            f"key {key!r} has wrong type {type(val).__name__}", source,
            fieldname=key)
    return val


def _parse_matrix(rows, n_rows: int, n_cols: int, fieldname: str,
                  source: str) -> tuple:
    if not isinstance(rows, list) or len(rows) != n_rows:
        raise AlgebraFileError(f"expected a {n_rows}x{n_cols} matrix",
                               source, fieldname=fieldname)
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n_cols:
            raise AlgebraFileError(
                f"row {i} must be a list of {n_cols} rationals",
                source, fieldname=fieldname)
        out.append(tuple(parse_rational(v, f"{fieldname}[{i}][{j}]", source)
                         for j, v in enumerate(row)))
    return tuple(out)


def algebra_from_dict(data: dict, source: str = "<string>") -> AlgebraFile:
    """Validate a decoded JSON object and build the algebra."""
    if not isinstance(data, dict):
        raise AlgebraFileError("top level must be a JSON object", source)
    fmt = _require(data, "format", str, source)
    if fmt != FORMAT_NAME:
        raise AlgebraFileError(f"unknown format {fmt!r} (expected"
                               f" {FORMAT_NAME!r})", source, fieldname="format")
    version = _require(data, "version", int, source)
    if version != FORMAT_VERSION:
        raise AlgebraFileError(f"unsupported version {version}", source,
                               fieldname="version")
    name = _require(data, "name", str, source)
    n_odd = _require(data, "n_odd", int, source)
    n_even = _require(data, "n_even", int, source)
    if n_odd < 0 or n_even < 0:
        raise AlgebraFileError("n_odd and n_even must be non-negative",
                               source, fieldname="n_odd")
    raw_gamma = _require(data, "gamma", list, source)
    gamma = {}
    for idx, row in enumerate(raw_gamma):
        fieldname = f"gamma[{idx}]"
        if not isinstance(row, list) or len(row) != 4:
            raise AlgebraFileError(
                "each gamma row is [mu, alpha, beta, coefficient]",
                source, fieldname=fieldname)
        mu, alpha, beta, coef = row
        for label, v in (("mu", mu), ("alpha", alpha), ("beta", beta)):
            if not isinstance(v, int) or isinstance(v, bool):
                raise AlgebraFileError(f"{label} must be an integer",
                                       source, fieldname=fieldname)
        key = (mu, alpha, beta)
        if key in gamma:
            raise AlgebraFileError(f"duplicate gamma key {key}",
                                   source, fieldname=fieldname)
        gamma[key] = parse_rational(coef, fieldname, source)

    declared = _require(data, "declared_dim_Y", int, source, optional=True)

    p0_raw = _require(data, "p0_action", list, source, optional=True)
    p0_action = None
    if p0_raw is not None:
        pairs = []
        for idx, entry in enumerate(p0_raw):
            fieldname = f"p0_action[{idx}]"
            if not isinstance(entry, dict) or set(entry) != {"odd", "even"}:
                raise AlgebraFileError(
                    "each action entry is {'odd': matrix, 'even': matrix}",
                    source, fieldname=fieldname)
            odd = _parse_matrix(entry["odd"], n_odd, n_odd,
                                fieldname + ".odd", source)
            even = _parse_matrix(entry["even"], n_even, n_even,
                                 fieldname + ".even", source)
            pairs.append((odd, even))
        p0_action = tuple(pairs)

    q_raw = _require(data, "q_vectors", dict, source, optional=True)
    q_vectors = {}
    if q_raw is not None:
        for qname, vec in sorted(q_raw.items()):
            fieldname = f"q_vectors[{qname!r}]"
            if not isinstance(vec, list) or len(vec) != n_odd:
                raise AlgebraFileError(
                    f"twist vector must have n_odd = {n_odd} components",
                    source, fieldname=fieldname)
            q_vectors[qname] = tuple(
                parse_rational(v, f"{fieldname}[{j}]", source)
                for j, v in enumerate(vec))

    extra = set(data) - {"format", "version", "name", "n_odd", "n_even",
                         "gamma", "declared_dim_Y", "p0_action", "q_vectors"}
    if extra:
        raise AlgebraFileError(f"unknown keys: {sorted(extra)}", source,
                               fieldname=sorted(extra)[0])

    try:
        algebra = SuperTranslationAlgebra(
            name=name, n_odd=n_odd, n_even=n_even, gamma=gamma,
            declared_dim_Y=declared, p0_action=p0_action)
    except ValueError as exc:
        raise AlgebraFileError(str(exc), source, fieldname="gamma") from exc
    return AlgebraFile(algebra=algebra, q_vectors=q_vectors)


def algebra_to_dict(algebra: SuperTranslationAlgebra,
                    q_vectors: Optional[dict] = None) -> dict:
    data = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": algebra.name,
        "n_odd": algebra.n_odd,
        "n_even": algebra.n_even,
        "gamma": [[mu, a, b, format_rational(coef)]
                  for (mu, a, b), coef in sorted(algebra.gamma.items())],
    }
    if algebra.declared_dim_Y is not None:
        data["declared_dim_Y"] = algebra.declared_dim_Y
    if algebra.p0_action is not None:
        data["p0_action"] = [
            {"odd": [[format_rational(v) for v in row] for row in odd],
             "even": [[format_rational(v) for v in row] for row in even]}
            for odd, even in algebra.p0_action]
    if q_vectors:
        data["q_vectors"] = {
            qname: [format_rational(v) for v in vec]
            for qname, vec in sorted(q_vectors.items())}
    return data


def loads_algebra(text: str, source: str = "<string>") -> AlgebraFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraFileError(f"invalid JSON: {exc.msg}", source,
                               line=exc.lineno) from exc
    return algebra_from_dict(data, source)


def dumps_algebra(algebra: SuperTranslationAlgebra,
                  q_vectors: Optional[dict] = None) -> str:
    return json.dumps(algebra_to_dict(algebra, q_vectors), indent=2,
                      sort_keys=True) + "\n"


def load_algebra(path: str) -> AlgebraFile:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_algebra(fh.read(), source=path)


def save_algebra(path: str, algebra: SuperTranslationAlgebra,
                 q_vectors: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_algebra(algebra, q_vectors))
