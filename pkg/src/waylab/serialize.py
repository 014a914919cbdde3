"""JSON codecs with deterministic float formatting.

Matrices travel as row-major nested lists of ``[re, im]`` pairs.  Report
emission goes through :func:`dumps`, a small recursive writer that renders
every float with 17 significant digits so identical inputs produce
byte-identical files; the stdlib ``json`` module cannot pin float formatting.
"""

from __future__ import annotations

import json
import math
from typing import Any, Sequence

import numpy as np

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "vector_to_json",
    "vector_from_json",
    "format_float",
    "dumps",
]


class SchemaError(ValueError):
    """Raised when scenario/report JSON fails structural validation."""


def format_float(x: float) -> str:
    if isinstance(x, bool):  # bool is an int subclass; keep it out of here
        raise TypeError("format_float got a bool")
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    if x == 0.0:
        # normalize -0.0 so equal values serialize identically
        return "0"
    return f"{x:.17g}"


def matrix_to_json(m) -> list[list[list[float]]]:
    """Row-major nested list of [re, im] pairs (plain floats, not strings)."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"matrix_to_json expects a 2-D array, got shape {a.shape}")
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(obj: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{where}: expected a non-empty list of rows")
    ncols = None
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"{where}[{i}]: expected a non-empty row list")
        if ncols is None:
            ncols = len(row)
        elif len(row) != ncols:
            raise SchemaError(f"{where}[{i}]: ragged row (expected {ncols} entries)")
        entries = []
        for j, cell in enumerate(row):
            entries.append(_entry_from_json(cell, f"{where}[{i}][{j}]"))
        rows.append(entries)
    return np.array(rows, dtype=complex)


def _entry_from_json(cell: Any, where: str) -> complex:
    if isinstance(cell, (int, float)) and not isinstance(cell, bool):
        return complex(float(cell), 0.0)
    if (
        isinstance(cell, list)
        and len(cell) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in cell)
    ):
        return complex(float(cell[0]), float(cell[1]))
    raise SchemaError(f"{where}: expected a number or [re, im] pair, got {cell!r}")


def vector_to_json(v) -> list[list[float]]:
    a = np.asarray(v, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in a]


def vector_from_json(obj: Any, where: str = "vector") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{where}: expected a non-empty list of entries")
    return np.array([_entry_from_json(cell, f"{where}[{i}]") for i, cell in enumerate(obj)])


def _write(obj: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for k, v in items[:-1]:
            out.append(f"{pad_in}{json.dumps(str(k), ensure_ascii=True)}: ")
            _write(v, out, indent, level + 1)
            out.append(",\n")
        k, v = items[-1]
        out.append(f"{pad_in}{json.dumps(str(k), ensure_ascii=True)}: ")
        _write(v, out, indent, level + 1)
        out.append(f"\n{pad}}}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        # numeric-only sequences stay on one line to keep matrices compact
        if all(
            isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
            for v in seq
        ):
            parts = [
                str(int(v))
                if isinstance(v, (int, np.integer))
                else format_float(float(v))
                for v in seq
            ]
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for v in seq[:-1]:
            out.append(pad_in)
            _write(v, out, indent, level + 1)
            out.append(",\n")
        out.append(pad_in)
        _write(seq[-1], out, indent, level + 1)
        out.append(f"\n{pad}]")
    else:
        raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text: insertion-ordered keys, 17-digit floats."""
    out: list[str] = []
    _write(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)
