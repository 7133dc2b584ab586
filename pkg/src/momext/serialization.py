"""JSON formats for matrices, conjugations, tuples, moment tables and measures.

Floats are written with 17 significant digits so that every value survives a
round trip exactly; non-finite floats are written as the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .antilinear import Conjugation
from .cayley_extension import CommutingTupleInstance, PartialSymmetricOperator
from .errors import InputError, InvalidShape
from .moment_problem import AtomicMeasure, MomentTable
from .numerics import Subspace


# ---------------------------------------------------------------------------
# Text


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _emit(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        # Leaf rows (numbers only) stay on one line.
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if v is None or isinstance(v, (bool, np.bool_)):
        return json.dumps(None if v is None else bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    out = []
    _emit(obj, 2, 0, out)
    return "".join(out) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def write_json(path, obj):
    text = dumps(obj)
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def require_key(d, key, kind=None):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"missing key {key!r}")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise InputError(f"key {key!r} has type {type(v).__name__}")
    return v


def _real(v, what="value") -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise InputError(f"{what} is not a number: {v!r}")
    try:
        return float(v)
    except ValueError:
        raise InputError(f"{what} is not a number: {v!r}") from None


# ---------------------------------------------------------------------------
# Matrices and conjugations


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A[:, None]
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in A.reshape(-1)],
    }


def matrix_from_json(d) -> np.ndarray:
    rows = require_key(d, "rows", int)
    cols = require_key(d, "cols", int)
    data = require_key(d, "data", list)
    if rows < 0 or cols < 0:
        raise InvalidShape(f"negative shape {rows}x{cols}")
    if len(data) != rows * cols:
        raise InvalidShape(f"{len(data)} entries for a {rows}x{cols} matrix")
    vals = np.empty(rows * cols, dtype=complex)
    for i, z in enumerate(data):
        if not isinstance(z, list) or len(z) != 2:
            raise InvalidShape(f"entry {i} is not a [re, im] pair")
        vals[i] = complex(_real(z[0]), _real(z[1]))
    if not np.all(np.isfinite(vals)):
        raise InputError("matrix has non-finite entries")
    return vals.reshape(rows, cols)


def conjugation_to_json(J: Conjugation) -> dict:
    d = {"kind": "conjugation"}
    d.update(matrix_to_json(J.matrix))
    return d


def conjugation_from_json(d) -> Conjugation:
    if d.get("kind", "conjugation") != "conjugation":
        raise InputError(f"expected kind 'conjugation', got {d.get('kind')!r}")
    return Conjugation(matrix_from_json(d))


# ---------------------------------------------------------------------------
# Commuting tuples


def tuple_to_json(T: CommutingTupleInstance) -> dict:
    return {
        "ambient_dim": T.ambient_dim,
        "domain": matrix_to_json(T.A1.domain.basis),
        "A1_action": matrix_to_json(T.A1.action),
        "A_rest": [matrix_to_json(A) for A in T.A_rest],
        "B": [matrix_to_json(B) for B in T.B_list],
        "J": conjugation_to_json(T.J),
        "z0": [float(complex(T.z0).real), float(complex(T.z0).imag)],
    }


def tuple_from_json(d) -> CommutingTupleInstance:
    n = require_key(d, "ambient_dim", int)
    basis = matrix_from_json(require_key(d, "domain", dict))
    action = matrix_from_json(require_key(d, "A1_action", dict))
    if basis.shape[0] != n or action.shape != (n, basis.shape[1]):
        raise InvalidShape(f"domain {basis.shape} / action {action.shape} do not fit ambient dim {n}")
    dom = Subspace(n, basis) if basis.shape[1] else Subspace.zero(n)
    if dom.orthonormality_defect() > 1e-10 * max(n, 1):
        raise InputError("domain basis columns are not orthonormal")
    A1 = PartialSymmetricOperator(n, dom, action)
    A_rest = [matrix_from_json(m) for m in d.get("A_rest", [])]
    B = [matrix_from_json(m) for m in d.get("B", [])]
    J = conjugation_from_json(d["J"]) if "J" in d else None
    z0 = d.get("z0", [0.0, 1.0])
    if not isinstance(z0, list) or len(z0) != 2:
        raise InputError("z0 must be [re, im]")
    return CommutingTupleInstance(n, A1, A_rest, B, J, complex(_real(z0[0]), _real(z0[1])))


# ---------------------------------------------------------------------------
# Moments and measures


def moments_to_json(S: MomentTable) -> dict:
    entries = []
    order = S.required_indices()
    extra = sorted(set(S.entries) - set(order))
    for m, n in order + extra:
        if (m, n) not in S.entries:
            continue
        v = S.entries[(m, n)]
        entries.append({"m": list(m), "n": list(n), "re": v.real, "im": v.imag})
    return {"r": S.r, "l": S.l, "m_box": list(S.m_box), "n_box": list(S.n_box), "entries": entries}


def _int_list(v, length, what):
    if not isinstance(v, list) or len(v) != length or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise InputError(f"{what} must be a list of {length} integers")
    return tuple(v)


def moments_from_json(d) -> MomentTable:
    r = require_key(d, "r", int)
    l = require_key(d, "l", int)
    if r < 1 or l < 0:
        raise InputError(f"invalid dimensions r={r}, l={l}")
    m_box = _int_list(require_key(d, "m_box"), r, "m_box")
    n_box = _int_list(require_key(d, "n_box"), l, "n_box")
    entries = {}
    for e in require_key(d, "entries", list):
        m = _int_list(require_key(e, "m"), r, "entry m")
        n = _int_list(require_key(e, "n"), l, "entry n")
        if (m, n) in entries:
            raise InputError(f"duplicate moment entry {(m, n)}")
        entries[(m, n)] = complex(_real(require_key(e, "re")), _real(require_key(e, "im")))
    return MomentTable(r, l, m_box, n_box, entries)


def measure_to_json(mu: AtomicMeasure) -> dict:
    atoms = [
        {"x": [float(v) for v in mu.x[a]], "phi": [float(v) for v in mu.phi[a]], "weight": float(mu.weights[a])}
        for a in range(mu.n_atoms)
    ]
    return {"r": mu.r, "l": mu.l, "atoms": atoms}


def measure_from_json(d) -> AtomicMeasure:
    r = require_key(d, "r", int)
    l = require_key(d, "l", int)
    atoms = []
    for a in require_key(d, "atoms", list):
        x = require_key(a, "x", list)
        phi = require_key(a, "phi", list)
        if len(x) != r or len(phi) != l:
            raise InvalidShape(f"atom {a} does not have {r} powers and {l} angles")
        atoms.append(([_real(v) for v in x], [_real(v) for v in phi], _real(require_key(a, "weight"))))
    return AtomicMeasure(
        r,
        l,
        np.array([a[0] for a in atoms], dtype=float).reshape(len(atoms), r),
        np.array([a[1] for a in atoms], dtype=float).reshape(len(atoms), l),
        np.array([a[2] for a in atoms], dtype=float),
    )
