"""JSON serialization for span programs, algorithms, and truth tables.

All payloads are plain JSON: real matrices as row-major number arrays,
complex matrices as row-major [re, im] pairs.  Python's JSON writer emits
shortest round-trip decimal forms, so 64-bit floats survive a write/read
cycle bit-exactly.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import MalformedProgram
from .monotone import PhaseEstimationAlgorithm, validate_pea
from .query_alg import QueryAlgorithm, validate_algorithm
from .span_core import SpanProgram, validate

__all__ = [
    "span_to_dict", "span_from_dict",
    "alg_to_dict", "alg_from_dict",
    "pea_to_dict", "pea_from_dict",
    "table_to_dict", "table_from_dict",
    "matrix_to_list", "matrix_from_list",
    "save_json", "load_json",
]


def matrix_to_list(M: np.ndarray, complex_entries: bool):
    M = np.asarray(M)
    if complex_entries:
        M = M.astype(complex)
        return [[[float(v.real), float(v.imag)] for v in row] for row in M]
    return [[float(v) for v in row] for row in np.real(M)]


def matrix_from_list(rows, complex_entries: bool) -> np.ndarray:
    if complex_entries:
        return np.array([[complex(v[0], v[1]) for v in row] for row in rows])
    return np.array([[float(v) for v in row] for row in rows])


def _vector_to_list(v: np.ndarray, complex_entries: bool):
    v = np.asarray(v).reshape(-1)
    if complex_entries:
        return [[float(c.real), float(c.imag)] for c in v.astype(complex)]
    return [float(c) for c in np.real(v)]


def _vector_from_list(vals, complex_entries: bool) -> np.ndarray:
    if complex_entries:
        return np.array([complex(v[0], v[1]) for v in vals])
    return np.array([float(v) for v in vals])


def _tag_to_str(tag) -> str:
    if tag in ("true", "false"):
        return tag
    return f"{tag[0]},{tag[1]}"


def _tag_from_str(s: str):
    if s in ("true", "false"):
        return s
    try:
        j, b = s.split(",")
        return (int(j), int(b))
    except ValueError:
        raise MalformedProgram(f"unrecognized tag string {s!r}")


def span_to_dict(P: SpanProgram) -> dict:
    P = validate(P)
    cx = P.field_tag == "complex"
    return {
        "n": P.n,
        "columns": [{"tag": _tag_to_str(t)} for t in P.tags],
        "A": matrix_to_list(P.A, cx),
        "tau": _vector_to_list(P.tau, cx),
        "field": P.field_tag,
    }


def span_from_dict(d: dict) -> SpanProgram:
    try:
        field = d.get("field", "real")
        cx = field == "complex"
        P = SpanProgram(
            n=int(d["n"]),
            tags=tuple(_tag_from_str(c["tag"]) for c in d["columns"]),
            A=matrix_from_list(d["A"], cx),
            tau=_vector_from_list(d["tau"], cx),
            field_tag=field)
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedProgram(f"bad span program payload: {exc}")
    return validate(P)


def alg_to_dict(alg: QueryAlgorithm) -> dict:
    alg = validate_algorithm(alg)
    return {
        "n": alg.n,
        "workspace_symbols": list(alg.workspace_symbols),
        "T": alg.T,
        "unitaries": [matrix_to_list(U, True) for U in alg.unitaries],
    }


def alg_from_dict(d: dict) -> QueryAlgorithm:
    try:
        alg = QueryAlgorithm(
            n=int(d["n"]),
            workspace_symbols=tuple(d["workspace_symbols"]),
            T=int(d["T"]),
            unitaries=tuple(matrix_from_list(U, True)
                            for U in d["unitaries"]))
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedProgram(f"bad query algorithm payload: {exc}")
    return validate_algorithm(alg)


def pea_to_dict(pea: PhaseEstimationAlgorithm) -> dict:
    pea = validate_pea(pea)
    return {
        "n": pea.n,
        "workspace_symbols": list(pea.workspace_symbols),
        "U": matrix_to_list(pea.U, True),
        "psi0": _vector_to_list(pea.psi0, True),
        "delta": pea.delta,
        "T": pea.T,
        "M": pea.M,
        "labels": list(pea.bit_labels()),
    }


def pea_from_dict(d: dict) -> PhaseEstimationAlgorithm:
    try:
        pea = PhaseEstimationAlgorithm(
            n=int(d["n"]),
            workspace_symbols=tuple(d["workspace_symbols"]),
            U=matrix_from_list(d["U"], True),
            psi0=_vector_from_list(d["psi0"], True),
            delta=float(d["delta"]),
            T=int(d["T"]),
            M=int(d["M"]),
            labels=tuple(int(j) for j in d["labels"]) if "labels" in d else None)
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedProgram(f"bad phase-estimation payload: {exc}")
    return validate_pea(pea)


def table_to_dict(f: dict, n: int) -> dict:
    """Truth table {bitstring: 0/1} -> JSON payload."""
    return {"n": n,
            "values": {"".join(str(b) for b in x): int(v)
                       for x, v in sorted(f.items())}}


def table_from_dict(d: dict):
    try:
        n = int(d["n"])
        f = {tuple(int(ch) for ch in key): int(v)
             for key, v in d["values"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedProgram(f"bad truth table payload: {exc}")
    for x in f:
        if len(x) != n:
            raise MalformedProgram(f"key {x} is not length {n}")
    return n, f


def save_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
