"""JSON documents for weights, functions, multiplier symbols and Carleson sequences.

::

    {"kind": "weight",   "dim": d, "depth": N, "leaves": [d×d arrays × 2^N]}
    {"kind": "function", "dim": d, "depth": N, "leaves": [length-d arrays × 2^N]}
    {"kind": "symbol",   "dim": d, "entries": [{"level": j, "position": k, "matrix": [...]}]}
    {"kind": "carleson", "dim": d, "entries": [...same as symbol...]}

Floats are written with ``repr`` (shortest round-tripping form), so loading a
written document reproduces every entry exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bounds import CarlesonSequence
from .dyadic import DyadicIndex, VectorField, internal_count
from .errors import InvalidInputError
from .operators import MultiplierSymbol
from .weights import WeightField

ASYMMETRY_TOL = 1e-9
KINDS = ("weight", "function", "symbol", "carleson")


def load_document(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path}: top level must be an object")
    return doc


def dumps(doc: dict) -> str:
    """Compact JSON with one leaf or entry per line."""
    lines = []
    for key, val in doc.items():
        if isinstance(val, list):
            items = ",\n  ".join(json.dumps(v) for v in val)
            lines.append(f"{json.dumps(key)}: [\n  {items}\n ]" if val else f"{json.dumps(key)}: []")
        else:
            lines.append(f"{json.dumps(key)}: {json.dumps(val)}")
    return "{\n " + ",\n ".join(lines) + "\n}\n"


def save_document(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc))


def _field(doc: dict, name: str, kind=int):
    if name not in doc:
        raise InvalidInputError(f"missing field {name!r}")
    val = doc[name]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise InvalidInputError(f"field {name!r} must be an integer")
    return val


def _expect_kind(doc: dict, kind: str) -> None:
    if doc.get("kind") != kind:
        raise InvalidInputError(f"field 'kind' must be {kind!r}, got {doc.get('kind')!r}")


def _array(value, shape: tuple, where: str) -> np.ndarray:
    try:
        a = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{where}: not a numeric array") from None
    if a.size == int(np.prod(shape)) and a.shape != shape:
        a = a.reshape(shape)  # flat row-major is accepted too
    if a.shape != shape:
        raise InvalidInputError(f"{where}: expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{where}: non-finite entries")
    return a


def _symmetric(a: np.ndarray, where: str) -> np.ndarray:
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if asym > ASYMMETRY_TOL * scale:
        raise InvalidInputError(f"{where}: matrix is not symmetric (asymmetry {asym:.3e})")
    return 0.5 * (a + a.T)


def _leaves(doc: dict) -> tuple[int, int, list]:
    dim = _field(doc, "dim")
    depth = _field(doc, "depth")
    if dim < 1 or depth < 0:
        raise InvalidInputError("fields 'dim' must be >= 1 and 'depth' >= 0")
    leaves = _field(doc, "leaves", list)
    if not isinstance(leaves, list) or len(leaves) != 1 << depth:
        n = len(leaves) if isinstance(leaves, list) else "non-list"
        raise InvalidInputError(f"field 'leaves' must hold 2^depth = {1 << depth} entries, got {n}")
    return dim, depth, leaves


def weight_from_doc(doc: dict) -> WeightField:
    _expect_kind(doc, "weight")
    dim, _, leaves = _leaves(doc)
    mats = [_symmetric(_array(m, (dim, dim), f"leaves[{i}]"), f"leaves[{i}]")
            for i, m in enumerate(leaves)]
    return WeightField(np.array(mats))


def function_from_doc(doc: dict) -> VectorField:
    _expect_kind(doc, "function")
    dim, _, leaves = _leaves(doc)
    return VectorField(np.array([_array(v, (dim,), f"leaves[{i}]") for i, v in enumerate(leaves)]))


def _entries(doc: dict, symmetric: bool) -> tuple[int, dict]:
    dim = _field(doc, "dim")
    if dim < 1:
        raise InvalidInputError("field 'dim' must be >= 1")
    entries = _field(doc, "entries", list)
    if not isinstance(entries, list):
        raise InvalidInputError("field 'entries' must be a list")
    out = {}
    for n, e in enumerate(entries):
        where = f"entries[{n}]"
        if not isinstance(e, dict):
            raise InvalidInputError(f"{where} must be an object")
        level = _field(e, "level")
        pos = _field(e, "position")
        if level < 0 or not 0 <= pos < (1 << level):
            raise InvalidInputError(f"{where}: no interval at level {level}, position {pos}")
        m = _array(_field(e, "matrix", list), (dim, dim), f"{where}.matrix")
        out[DyadicIndex(level, pos)] = _symmetric(m, f"{where}.matrix") if symmetric else m
    return dim, out


def _levels(entries: dict, levels: int | None) -> int:
    need = max((i.level for i in entries), default=-1) + 1
    if levels is None:
        return max(need, 1)
    if need > levels:
        raise InvalidInputError(f"entries reach level {need - 1}, beyond the {levels} available")
    return levels


def symbol_from_doc(doc: dict, levels: int | None = None) -> MultiplierSymbol:
    _expect_kind(doc, "symbol")
    dim, entries = _entries(doc, symmetric=False)
    return MultiplierSymbol.from_entries(dim, _levels(entries, levels), entries)


def sequence_from_doc(doc: dict, levels: int | None = None) -> CarlesonSequence:
    _expect_kind(doc, "carleson")
    dim, entries = _entries(doc, symmetric=True)
    m = np.zeros((internal_count(_levels(entries, levels)), dim, dim))
    for interval, mat in entries.items():
        m[interval.index] = mat
    return CarlesonSequence(m)


def weight_to_doc(w: WeightField) -> dict:
    return {"kind": "weight", "dim": w.dim, "depth": w.depth, "leaves": w.values.tolist()}


def function_to_doc(f: VectorField) -> dict:
    return {"kind": "function", "dim": f.dim, "depth": f.depth, "leaves": f.values.tolist()}


def _entries_doc(kind: str, matrices: np.ndarray) -> dict:
    entries = []
    for i, m in enumerate(matrices):
        interval = DyadicIndex.from_index(i)
        entries.append({"level": interval.level, "position": interval.position,
                        "matrix": m.tolist()})
    return {"kind": kind, "dim": matrices.shape[1], "entries": entries}


def symbol_to_doc(sigma: MultiplierSymbol) -> dict:
    return _entries_doc("symbol", sigma.matrices)


def sequence_to_doc(seq: CarlesonSequence) -> dict:
    return _entries_doc("carleson", seq.matrices)


def load(path, levels: int | None = None):
    """Load any supported document, dispatching on its ``kind``."""
    try:
        return load_from_doc(load_document(path), levels)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None


def load_from_doc(doc: dict, levels: int | None = None):
    kind = doc.get("kind")
    if kind == "weight":
        return weight_from_doc(doc)
    if kind == "function":
        return function_from_doc(doc)
    if kind == "symbol":
        return symbol_from_doc(doc, levels)
    if kind == "carleson":
        return sequence_from_doc(doc, levels)
    raise InvalidInputError(f"field 'kind' must be one of {KINDS}, got {kind!r}")


def to_doc(obj) -> dict:
    if isinstance(obj, WeightField):
        return weight_to_doc(obj)
    if isinstance(obj, VectorField):
        return function_to_doc(obj)
    if isinstance(obj, MultiplierSymbol):
        return symbol_to_doc(obj)
    if isinstance(obj, CarlesonSequence):
        return sequence_to_doc(obj)
    raise InvalidInputError(f"cannot serialize {type(obj).__name__}")
