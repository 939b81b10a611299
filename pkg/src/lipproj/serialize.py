"""Deterministic CSV/JSON writers.

Floats are printed with a fixed number of significant digits: 17 in JSON
(round-trip exact for float64) and 12 in CSV (readable, stable).  The JSON
writer is hand-rolled so the float format is under our control; it supports
the plain data shapes this package emits (dict / list / str / int / float /
bool / None).
"""

from __future__ import annotations

import json
import math

JSON_SIG_DIGITS = 17
CSV_SIG_DIGITS = 12


def format_float(x: float, sig: int) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite value {x!r} in serialized output")
    return f"{x:.{sig}g}"


def to_json(obj, sig: int = JSON_SIG_DIGITS, indent: int = 0) -> str:
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj, sig)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = [f'{pad}  {json.dumps(str(k))}: {to_json(v, sig, indent + 2)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}" if items else "{}"
    if isinstance(obj, (list, tuple)):
        items = [to_json(v, sig, indent) for v in obj]
        flat = "[" + ", ".join(items) + "]"
        if len(flat) <= 100:
            return flat
        items = [f"{pad}  {it}" for it in items]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    try:
        return to_json(obj.item(), sig, indent)  # numpy scalars
    except AttributeError:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path, obj, sig: int = JSON_SIG_DIGITS) -> None:
    with open(path, "w") as fh:
        fh.write(to_json(obj, sig))
        fh.write("\n")


def csv_cell(v, sig: int = CSV_SIG_DIGITS) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v, sig)
    return str(v)


def write_csv(path, header, rows, sig: int = CSV_SIG_DIGITS) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(csv_cell(v, sig) for v in row) + "\n")
