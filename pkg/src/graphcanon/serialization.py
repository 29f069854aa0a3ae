"""JSON documents for matrices and canonical results.

A matrix document looks like::

    {"schema_version": "1", "rows": 2, "cols": 2,
     "entries": [[[1.0, 0.0], [0.0, 2.5]], [[0.0, 0.0], [3.0, -1.0]]]}

Each entry is ``[re, im]``; a bare number is accepted on input as a real
entry.  Output uses Python's shortest round-trip float repr, so parsing a
serialized document gives back the same binary64 values bit for bit.

Result documents always list their keys in this order::

    schema_version, kind, matrices, graph, partition, reduced_positions,
    permutation, summands, diagnostics

(keys that do not apply to a document kind are left out; any other keys
follow in the order the document was built).  Matrix documents use
``schema_version, rows, cols, entries``.  Vertices, positions and
permutations are 1-based.
"""

from __future__ import annotations

import json
import math
import re

import numpy as np

from .errors import DimensionMismatch, NonFiniteEntry, ParseError
from .forests import DiForest, Forest
from .numerics import max_norm
from .triangularize import BlockPartition

SCHEMA_VERSION = "1"

_NUM = r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
# innermost arrays of scalars are written on one line
_SCALAR_ARRAY = re.compile(r"\[\s*((?:(?:%s|\"[^\",\n]*\"),\s*)*(?:%s|\"[^\",\n]*\"))\s*\]" % (_NUM, _NUM))

KEY_ORDER = (
    "schema_version",
    "kind",
    "matrices",
    "graph",
    "partition",
    "reduced_positions",
    "permutation",
    "summands",
    "diagnostics",
)


def _reject_constant(name):
    raise NonFiniteEntry(f"non-finite literal {name}")


def _loads(text):
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _number(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        if isinstance(x, str) and x.strip().lower().lstrip("+-") in ("nan", "inf", "infinity"):
            raise NonFiniteEntry(f"non-finite entry {x!r} at {where}")
        raise ParseError(f"expected a number at {where}, got {x!r}")
    try:
        v = float(x)
    except OverflowError:
        raise NonFiniteEntry(f"entry at {where} overflows") from None
    if not math.isfinite(v):
        raise NonFiniteEntry(f"non-finite entry at {where}")
    return v


def _entry(e, where) -> complex:
    if isinstance(e, list):
        if len(e) != 2:
            raise DimensionMismatch(f"entry at {where} must be [re, im], got {len(e)} numbers")
        return complex(_number(e[0], where), _number(e[1], where))
    return complex(_number(e, where), 0.0)


def matrix_from_document(doc) -> np.ndarray:
    """Build a complex matrix from a decoded matrix document (or a bare nested list)."""
    if isinstance(doc, list):
        doc = {"entries": doc}
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ParseError("matrix document needs an 'entries' field")
    rows_data = doc["entries"]
    if not isinstance(rows_data, list):
        raise ParseError("'entries' must be an array of rows")
    rows = doc.get("rows", len(rows_data))
    cols = doc.get("cols", len(rows_data[0]) if rows_data and isinstance(rows_data[0], list) else 0)
    for name, v in (("rows", rows), ("cols", cols)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ParseError(f"'{name}' must be a nonnegative integer")
    if len(rows_data) != rows:
        raise DimensionMismatch(f"expected {rows} rows, found {len(rows_data)}")
    out = np.zeros((rows, cols), dtype=np.complex128)
    for i, row in enumerate(rows_data):
        if not isinstance(row, list):
            raise ParseError(f"row {i + 1} is not an array")
        if len(row) != cols:
            raise DimensionMismatch(f"row {i + 1} has {len(row)} entries, expected {cols}")
        for j, e in enumerate(row):
            out[i, j] = _entry(e, f"row {i + 1}, column {j + 1}")
    return out


def parse_matrix(text) -> np.ndarray:
    """Parse a matrix document from JSON text.

    Raises
    ------
    ParseError
        Malformed JSON (with line and column) or a malformed document.
    DimensionMismatch
        ``entries`` does not match ``rows`` x ``cols``.
    NonFiniteEntry
        NaN or infinite entries.
    """
    return matrix_from_document(_loads(text))


def matrix_document(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def _complex_pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _ordered(doc: dict) -> dict:
    extra = [k for k in doc if k not in KEY_ORDER]
    return {k: doc[k] for k in (*KEY_ORDER, *extra) if k in doc}


def serialize(doc: dict) -> str:
    """Deterministic JSON text: fixed key order, shortest round-trip floats, LF, trailing newline."""
    text = json.dumps(_ordered(doc), indent=2, ensure_ascii=False, allow_nan=False)
    text = _SCALAR_ARRAY.sub(lambda mt: "[" + re.sub(r",\s+", ", ", mt.group(1)) + "]", text)
    return text + "\n"


def serialize_matrix(m) -> str:
    return serialize(matrix_document(m))


def _graph_document(g, directed: bool) -> dict:
    edges = [[p, q, "->"] if directed else [p, q] for p, q in g.edges]
    return {"vertices": g.vertex_count, "edges": edges}


def _partition_document(part: BlockPartition) -> dict:
    return {"sizes": list(part.sizes), "eigenvalues": [_complex_pair(z) for z in part.eigenvalues]}


def unitary_residuals(m, cr) -> dict:
    """Relative backward error of ``u_total^H m u_total = m_can`` and loss of unitarity."""
    u = cr.u_total
    scale = max(max_norm(m), 1e-300)
    return {
        "similarity": max_norm(u.conj().T @ m @ u - cr.m_can) / scale,
        "unitarity": max_norm(u.conj().T @ u - np.eye(u.shape[0])),
    }


def pair_residuals(m, n_mat, cpr) -> dict:
    s = cpr.s_total
    lam = np.diag(np.array(cpr.lam, dtype=np.complex128))
    return {
        "m": max_norm(m @ s - s @ lam) / max(max_norm(m), 1e-300),
        "n": max_norm(n_mat @ s - s @ cpr.b_can) / max(max_norm(n_mat), 1e-300),
    }


def unitary_result_document(cr, tol, residuals=None) -> dict:
    diag = {"tolerances": tol.as_dict()}
    if residuals is not None:
        diag["residuals"] = residuals
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "unitary-canonical",
        "matrices": {"m_can": matrix_document(cr.m_can), "u_total": matrix_document(cr.u_total)},
        "graph": _graph_document(cr.g, directed=False),
        "partition": _partition_document(cr.partition),
        "reduced_positions": [list(p) for p in cr.marked],
        "diagnostics": diag,
    }


def pair_result_document(cpr, tol, residuals=None) -> dict:
    diag = {"tolerances": tol.as_dict()}
    if residuals is not None:
        diag["residuals"] = residuals
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "pair-canonical",
        "matrices": {
            "lambda": matrix_document(np.array(cpr.lam, dtype=np.complex128)[None, :]),
            "b_can": matrix_document(cpr.b_can),
            "s_total": matrix_document(cpr.s_total),
        },
        "graph": _graph_document(cpr.g, directed=True),
        "reduced_positions": [list(p) for p in cpr.ones],
        "diagnostics": diag,
    }


def decomposition_document(summands, perm, tol) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "unitary-decomposition",
        "permutation": [int(k) + 1 for k in perm],
        "summands": [
            {
                "vertices": list(s.original_vertices),
                "graph": _graph_document(s.tree, directed=False),
                "partition": _partition_document(s.partition),
                "matrix": matrix_document(s.matrix),
            }
            for s in summands
        ],
        "diagnostics": {"tolerances": tol.as_dict()},
    }


def _graph_from(doc, directed: bool):
    try:
        g = (DiForest if directed else Forest)(int(doc["vertices"]))
        for e in doc["edges"]:
            g.add_edge(int(e[0]), int(e[1]))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"bad graph field: {exc}") from None
    return g


def load_result(text):
    """Decode a result document.

    Returns ``(kind, fields)`` where ``fields`` holds numpy matrices, a
    rebuilt :class:`Forest` / :class:`DiForest` and, for the unitary kind,
    the :class:`BlockPartition`.
    """
    doc = _loads(text)
    if not isinstance(doc, dict):
        raise ParseError("result document must be a JSON object")
    kind = doc.get("kind")
    try:
        mats = {k: matrix_from_document(v) for k, v in doc["matrices"].items()}
    except (KeyError, AttributeError):
        raise ParseError("result document needs a 'matrices' object") from None
    if kind == "unitary-canonical":
        try:
            p = doc["partition"]
            part = BlockPartition(
                tuple(int(k) for k in p["sizes"]), tuple(_entry(z, "eigenvalue") for z in p["eigenvalues"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad partition field: {exc}") from None
        return kind, {"m_can": mats["m_can"], "u_total": mats.get("u_total"), "partition": part,
                      "g": _graph_from(doc.get("graph", {}), directed=False)}
    if kind == "pair-canonical":
        lam = mats["lambda"].reshape(-1)
        return kind, {"lam": [complex(z) for z in lam], "b_can": mats["b_can"], "s_total": mats.get("s_total"),
                      "g": _graph_from(doc.get("graph", {}), directed=True)}
    raise ParseError(f"unknown result kind {kind!r}")
