"""JSON artifact formats.  Rationals travel as reduced "p/q" strings."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1

_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


class SchemaError(ValueError):
    """Malformed artifact; carries the offending field or line when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


def parse_rational(text: Any, field: str = "value") -> Fraction:
    if isinstance(text, bool):
        raise SchemaError(f"boolean is not a rational: {text!r}", field=field)
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        # floating literals are refused on purpose
        raise SchemaError(f"rationals must be 'p/q' strings, got {text!r}", field=field)
    mt = _RATIONAL.match(text)
    if not mt:
        raise SchemaError(f"malformed rational {text!r}", field=field)
    num = int(mt.group(1))
    den = int(mt.group(2)) if mt.group(2) is not None else 1
    if den == 0:
        raise SchemaError(f"zero denominator in {text!r}", field=field)
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _vector(raw, m: int, field: str) -> list[Fraction]:
    if not isinstance(raw, list) or len(raw) != m:
        raise SchemaError(f"expected a list of {m} rationals", field=field)
    return [parse_rational(v, f"{field}[{i}]") for i, v in enumerate(raw)]


def _matrix(raw, m: int, field: str) -> list[list[Fraction]]:
    if not isinstance(raw, list) or len(raw) != m:
        raise SchemaError(f"expected {m} rows", field=field)
    return [_vector(row, m, f"{field}[{i}]") for i, row in enumerate(raw)]


def _get_m(obj: dict) -> int:
    if not isinstance(obj, dict):
        raise SchemaError("top-level JSON value must be an object")
    m = obj.get("m")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise SchemaError("'m' must be a positive integer", field="m")
    return m


# -- Behavior -------------------------------------------------------------- #

def behavior_to_dict(b) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "behavior",
        "m": b.m,
        "joint": [[format_rational(v) for v in row] for row in b.joint],
        "marg_a": [format_rational(v) for v in b.marg_a],
        "marg_b": [format_rational(v) for v in b.marg_b],
    }


def behavior_from_dict(obj: dict):
    from .behavior import Behavior

    m = _get_m(obj)
    joint = _matrix(obj.get("joint"), m, "joint")
    ma = _vector(obj.get("marg_a"), m, "marg_a")
    mb = _vector(obj.get("marg_b"), m, "marg_b")
    try:
        return Behavior(m, joint, ma, mb)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# -- BellFunctional -------------------------------------------------------- #

def functional_to_dict(f) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "functional",
        "name": f.name,
        "m": f.m,
        "marg_a": [format_rational(v) for v in f.marg_a],
        "marg_b": [format_rational(v) for v in f.marg_b],
        "joint": [[format_rational(v) for v in row] for row in f.joint],
    }
    if f.bound is not None:
        out["bound"] = format_rational(f.bound)
    return out


def functional_from_dict(obj: dict):
    from .polytope import BellFunctional

    m = _get_m(obj)
    joint = _matrix(obj.get("joint"), m, "joint")
    ma = _vector(obj.get("marg_a"), m, "marg_a")
    mb = _vector(obj.get("marg_b"), m, "marg_b")
    bound = obj.get("bound")
    bound = parse_rational(bound, "bound") if bound is not None else None
    name = obj.get("name") or ""
    if not isinstance(name, str):
        raise SchemaError("'name' must be a string", field="name")
    return BellFunctional(m, joint, ma, mb, bound, name)


# -- Template -------------------------------------------------------------- #

def template_to_dict(t) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "template",
        "m": t.m,
        "letters": list(t.letters),
        "cells": {key: letter for key, letter in t.cells_as_keys().items()},
        **({"values": {k: format_rational(v) for k, v in t.values}} if t.values else {}),
    }


def template_from_dict(obj: dict):
    from .tighten import Template

    m = _get_m(obj)
    letters = obj.get("letters")
    if not isinstance(letters, list) or not all(isinstance(x, str) for x in letters):
        raise SchemaError("'letters' must be a list of strings", field="letters")
    cells = obj.get("cells")
    if not isinstance(cells, dict):
        raise SchemaError("'cells' must be an object", field="cells")
    raw_values = obj.get("values", {})
    if not isinstance(raw_values, dict):
        raise SchemaError("'values' must be an object", field="values")
    values = tuple((k, parse_rational(v, f"values.{k}")) for k, v in raw_values.items())
    try:
        t = Template.from_keys(m, cells, letters)
        return Template(t.m, t.cells, t.letters, values) if values else t
    except ValueError as exc:
        raise SchemaError(str(exc), field="cells") from exc


# -- generic helpers ------------------------------------------------------- #

def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def load_json(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc


def write_json(path: str | Path, obj: dict) -> None:
    """Write atomically so a failing run never leaves partial JSON behind."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(dumps(obj))
    tmp.replace(path)
