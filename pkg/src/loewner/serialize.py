"""Canonical JSON serialization for the package's file formats.

Three document kinds cross the process boundary: sampled functions (first
order data at nodes), realizations (transfer / selfadjoint / cauchy), and
discrete measures.  Reports produced by the command-line front end reuse the
same emitter.

The emitter is canonical: keys are sorted, floats are printed with 17
significant digits (enough to round-trip IEEE doubles exactly), negative zero
is normalized, and complex numbers always appear as two-element [re, im]
arrays.  write . load . write is therefore byte-identical, and two
semantically equal documents serialize to the same bytes.
"""

import json
import math

import numpy as np

from .errors import SchemaError
from .linalg import GradedSpace, require_hermitian
from .certify import SampledFunction, sampled_function
from .realize import (
    CauchyRealization,
    DiscreteMeasure,
    SelfAdjointRealization,
    TransferRealization,
    discrete_measure,
    transfer_realization,
)


# ---------------------------------------------------------------------------
# Canonical emitter.

def _format_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def _emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_real(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        out.append("[")
        out.append(_format_real(z.real))
        out.append(",")
        out.append(_format_real(z.imag))
        out.append("]")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ValueError(f"non-string key {key!r}")
            if k:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise ValueError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(doc) -> str:
    out = []
    _emit(doc, out)
    return "".join(out)


def write_json(path, doc) -> None:
    text = canonical_dumps(doc)
    with open(path, "w") as fh:
        fh.write(text)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"not valid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# Schema checks.  Each helper validates one shape and raises SchemaError with
# the JSON pointer of the first violation.

def _obj(doc, ptr: str, keys) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError(ptr, f"expected object, got {type(doc).__name__}")
    for key in keys:
        if key not in doc:
            raise SchemaError(ptr, f"missing key {key!r}")
    for key in doc:
        if key not in keys:
            raise SchemaError(f"{ptr}/{key}", "unexpected key")
    return doc


def _array(doc, ptr: str, min_len: int = 0) -> list:
    if not isinstance(doc, list):
        raise SchemaError(ptr, f"expected array, got {type(doc).__name__}")
    if len(doc) < min_len:
        raise SchemaError(ptr, f"expected at least {min_len} entries, got {len(doc)}")
    return doc


def _real(doc, ptr: str) -> float:
    if isinstance(doc, bool) or not isinstance(doc, (int, float)):
        raise SchemaError(ptr, f"expected number, got {type(doc).__name__}")
    x = float(doc)
    if not math.isfinite(x):
        raise SchemaError(ptr, "number must be finite")
    return x + 0.0 if x != 0.0 else 0.0


def _integer(doc, ptr: str, minimum=None) -> int:
    if isinstance(doc, bool) or not isinstance(doc, int):
        raise SchemaError(ptr, f"expected integer, got {type(doc).__name__}")
    if minimum is not None and doc < minimum:
        raise SchemaError(ptr, f"expected >= {minimum}, got {doc}")
    return doc


def _boolean(doc, ptr: str) -> bool:
    if not isinstance(doc, bool):
        raise SchemaError(ptr, f"expected boolean, got {type(doc).__name__}")
    return doc


def _choice(doc, ptr: str, values) -> str:
    if not isinstance(doc, str):
        raise SchemaError(ptr, f"expected string, got {type(doc).__name__}")
    if doc not in values:
        raise SchemaError(ptr, f"expected one of {sorted(values)}, got {doc!r}")
    return doc


def _complex_entry(doc, ptr: str) -> complex:
    arr = _array(doc, ptr)
    if len(arr) != 2:
        raise SchemaError(ptr, f"complex entry needs [re, im], got {len(arr)} entries")
    return complex(_real(arr[0], f"{ptr}/0"), _real(arr[1], f"{ptr}/1"))


def _real_vector(doc, ptr: str, length=None) -> np.ndarray:
    arr = _array(doc, ptr, min_len=1)
    if length is not None and len(arr) != length:
        raise SchemaError(ptr, f"expected {length} entries, got {len(arr)}")
    return np.array([_real(x, f"{ptr}/{k}") for k, x in enumerate(arr)])


def _complex_vector(doc, ptr: str, length=None) -> np.ndarray:
    arr = _array(doc, ptr, min_len=1)
    if length is not None and len(arr) != length:
        raise SchemaError(ptr, f"expected {length} entries, got {len(arr)}")
    return np.array([_complex_entry(x, f"{ptr}/{k}") for k, x in enumerate(arr)])


def _complex_matrix(doc, ptr: str, rows=None, cols=None) -> np.ndarray:
    arr = _array(doc, ptr, min_len=1)
    if rows is not None and len(arr) != rows:
        raise SchemaError(ptr, f"expected {rows} rows, got {len(arr)}")
    width = cols
    data = []
    for i, row in enumerate(arr):
        rptr = f"{ptr}/{i}"
        row = _array(row, rptr, min_len=1)
        if width is None:
            width = len(row)
        if len(row) != width:
            raise SchemaError(rptr, f"expected {width} entries, got {len(row)}")
        data.append([_complex_entry(x, f"{rptr}/{j}") for j, x in enumerate(row)])
    return np.array(data)


# ---------------------------------------------------------------------------
# Complex payload builders (document side).

def _c(z) -> list:
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def _cvec(v) -> list:
    return [_c(z) for z in np.asarray(v).ravel()]


def _cmat(m) -> list:
    m = np.asarray(m)
    return [[_c(z) for z in row] for row in m]


# ---------------------------------------------------------------------------
# Sampled functions: {d, nodes: [{x, f, grad}]}.

def sampled_function_to_doc(sf: SampledFunction) -> dict:
    nodes = []
    for i in range(sf.n):
        nodes.append({
            "x": [float(v) for v in sf.nodes[i]],
            "f": float(sf.values[i]),
            "grad": [float(v) for v in sf.gradients[i]],
        })
    return {"d": sf.d, "nodes": nodes}


def doc_to_sampled_function(doc) -> SampledFunction:
    _obj(doc, "", ("d", "nodes"))
    d = _integer(doc["d"], "/d", minimum=1)
    raw = _array(doc["nodes"], "/nodes", min_len=1)
    xs, fs, gs = [], [], []
    for i, node in enumerate(raw):
        ptr = f"/nodes/{i}"
        _obj(node, ptr, ("x", "f", "grad"))
        xs.append(_real_vector(node["x"], f"{ptr}/x", length=d))
        fs.append(_real(node["f"], f"{ptr}/f"))
        gs.append(_real_vector(node["grad"], f"{ptr}/grad", length=d))
    try:
        return sampled_function(np.stack(xs), np.array(fs), np.stack(gs))
    except Exception as exc:
        raise SchemaError("/nodes", str(exc)) from None


def load_sampled_function(path) -> SampledFunction:
    return doc_to_sampled_function(read_json(path))


def save_sampled_function(path, sf: SampledFunction) -> None:
    write_json(path, sampled_function_to_doc(sf))


# ---------------------------------------------------------------------------
# Realizations.  Common keys: kind, grading; the rest depend on kind.

_REALIZATION_KEYS = {
    "transfer": ("kind", "grading", "a", "beta", "gamma", "D", "unitary_flag"),
    "selfadjoint": ("kind", "grading", "c", "X", "v", "z0", "t"),
    "cauchy": ("kind", "grading", "C", "X", "v1"),
}


def realization_to_doc(r) -> dict:
    if isinstance(r, TransferRealization):
        return {
            "kind": "transfer",
            "grading": list(r.grading.dims),
            "a": _c(r.a),
            "beta": _cvec(r.beta),
            "gamma": _cvec(r.gamma),
            "D": _cmat(r.d_op),
            "unitary_flag": bool(r.unitary_flag),
        }
    if isinstance(r, SelfAdjointRealization):
        return {
            "kind": "selfadjoint",
            "grading": list(r.grading.dims),
            "c": float(r.c),
            "X": _cmat(r.x),
            "v": _cvec(r.v),
            "z0": _cvec(r.z0),
            "t": float(r.t),
        }
    if isinstance(r, CauchyRealization):
        return {
            "kind": "cauchy",
            "grading": list(r.grading.dims),
            "C": float(r.c),
            "X": _cmat(r.x),
            "v1": _cvec(r.v1),
        }
    raise ValueError(f"not a realization: {type(r).__name__}")


def doc_to_realization(doc):
    if not isinstance(doc, dict):
        raise SchemaError("", f"expected object, got {type(doc).__name__}")
    kind = _choice(doc.get("kind"), "/kind", set(_REALIZATION_KEYS))
    _obj(doc, "", _REALIZATION_KEYS[kind])
    dims = _array(doc["grading"], "/grading", min_len=1)
    dims = tuple(_integer(m, f"/grading/{r}", minimum=1) for r, m in enumerate(dims))
    grading = GradedSpace(dims)
    total = grading.total

    if kind == "transfer":
        a = _complex_entry(doc["a"], "/a")
        beta = _complex_vector(doc["beta"], "/beta", length=total)
        gamma = _complex_vector(doc["gamma"], "/gamma", length=total)
        d_op = _complex_matrix(doc["D"], "/D", rows=total, cols=total)
        flag = _boolean(doc["unitary_flag"], "/unitary_flag")
        try:
            return transfer_realization(a, beta, gamma, d_op, grading,
                                        unitary_flag=flag)
        except Exception as exc:
            raise SchemaError("", f"not a valid transfer realization: {exc}") from None

    x = _complex_matrix(doc["X"], "/X", rows=total, cols=total)
    try:
        x = require_hermitian(x)
    except Exception as exc:
        raise SchemaError("/X", f"not Hermitian: {exc}") from None

    if kind == "selfadjoint":
        c = _real(doc["c"], "/c")
        v = _complex_vector(doc["v"], "/v", length=total)
        z0 = _complex_vector(doc["z0"], "/z0", length=grading.d)
        if np.any(z0.imag <= 0):
            raise SchemaError("/z0", "base point must lie in the upper half-plane slotwise")
        t = _real(doc["t"], "/t")
        return SelfAdjointRealization(c, x, v, z0, grading, t)

    c = _real(doc["C"], "/C")
    v1 = _complex_vector(doc["v1"], "/v1", length=total)
    return CauchyRealization(c, x, v1, grading)


def load_realization(path):
    return doc_to_realization(read_json(path))


def save_realization(path, r) -> None:
    write_json(path, realization_to_doc(r))


# ---------------------------------------------------------------------------
# Discrete measures: {support, atoms: [{loc|theta, mass}]}.

def measure_to_doc(dm: DiscreteMeasure) -> dict:
    key = "loc" if dm.support == "line" else "theta"
    atoms = [{key: float(loc), "mass": float(mass)}
             for loc, mass in zip(dm.locations, dm.masses)]
    return {"support": dm.support, "atoms": atoms}


def doc_to_measure(doc) -> DiscreteMeasure:
    _obj(doc, "", ("support", "atoms"))
    support = _choice(doc["support"], "/support", ("line", "circle"))
    key = "loc" if support == "line" else "theta"
    raw = _array(doc["atoms"], "/atoms", min_len=1)
    locs, masses = [], []
    for i, atom in enumerate(raw):
        ptr = f"/atoms/{i}"
        _obj(atom, ptr, (key, "mass"))
        locs.append(_real(atom[key], f"{ptr}/{key}"))
        mass = _real(atom["mass"], f"{ptr}/mass")
        if mass <= 0:
            raise SchemaError(f"{ptr}/mass", "mass must be positive")
        masses.append(mass)
    return discrete_measure(support, locs, masses)


def load_measure(path) -> DiscreteMeasure:
    return doc_to_measure(read_json(path))


def save_measure(path, dm: DiscreteMeasure) -> None:
    write_json(path, measure_to_doc(dm))
