"""Plain-text file formats: vector/alpha/weight CSVs and JSON with 17-digit floats."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


def fmt(x) -> str:
    """Round-trip exact float text."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(x)
    return f"{x:.17g}"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def _rows(path):
    with open(path, newline="") as fh:
        return [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]


def read_vector(path, field: str = "real") -> np.ndarray:
    """One column (real) or two columns ``re,im``; a non-numeric first row is a header."""
    rows = _rows(path)
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    if data.size == 0:
        return np.zeros(0, dtype=complex if field == "complex" else float)
    if field == "complex":
        if data.shape[1] == 1:
            return data[:, 0].astype(complex)
        return data[:, 0] + 1j * data[:, 1]
    if field != "real":
        raise InvalidInputError(f"unknown field {field!r}")
    if data.shape[1] != 1:
        raise InvalidInputError("real vectors need exactly one column")
    return data[:, 0]


def write_vector(path, v) -> None:
    v = np.asarray(v)
    with open(path, "w", newline="") as fh:
        if np.iscomplexobj(v):
            fh.write("re,im\n")
            fh.writelines(f"{fmt(z.real)},{fmt(z.imag)}\n" for z in v)
        else:
            fh.write("value\n")
            fh.writelines(f"{fmt(z)}\n" for z in v)


def read_matrix(path) -> np.ndarray:
    """Numeric CSV, one row per line; a non-numeric first row is skipped as header."""
    rows = _rows(path)
    if rows:
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


def write_alpha(path, alpha) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("index,alpha\n")
        fh.writelines(f"{j},{fmt(a)}\n" for j, a in enumerate(np.asarray(alpha, dtype=float)))


def read_alpha(path) -> np.ndarray:
    rows = _rows(path)
    if not rows or rows[0][:2] != ["index", "alpha"]:
        raise InvalidInputError(f"{path}: expected header 'index,alpha'")
    body = rows[1:]
    idx = [int(r[0]) for r in body]
    if idx != list(range(len(body))):
        raise InvalidInputError(f"{path}: indices must be 0..n-1 in order")
    return np.array([float(r[1]) for r in body], dtype=float)


def write_weights(path, alpha, weight, footer: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("index,alpha,weight\n")
        for j, (a, w) in enumerate(zip(np.asarray(alpha, dtype=float), np.asarray(weight, dtype=float))):
            fh.write(f"{j},{fmt(a)},{fmt(w)}\n")
        for key, val in footer.items():
            text = fmt(val) if isinstance(val, (float, np.floating)) else str(val)
            fh.write(f"# {key}={text}\n")


def read_weights(path) -> tuple[np.ndarray, np.ndarray, dict]:
    """Returns ``(alpha, weight, footer)``; footer values stay strings."""
    footer = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                footer[key.strip()] = val.strip()
            else:
                body.append(line.split(","))
    if not body or body[0] != ["index", "alpha", "weight"]:
        raise InvalidInputError(f"{path}: expected header 'index,alpha,weight'")
    data = np.array([[float(v) for v in r[1:]] for r in body[1:]], dtype=float).reshape(-1, 2)
    return data[:, 0], data[:, 1], footer
