"""File formats: functions, matrices, curves, reports.

All floats are written with 17 significant digits so that reading a file
back reproduces the doubles bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import AutocorrError, InvalidFunctionError
from .functional import FunctionalReport, ShiftPoint
from .grid_fn import GridFunction
from .matrix_spec import ShiftMatrix


def fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def to_jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, ShiftPoint):
        return list(obj.coords)
    if isinstance(obj, GridFunction):
        return function_to_dict(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _encode(obj, indent: int | None, level: int) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        # keep numeric arrays on one line
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = None) -> str:
    return _encode(to_jsonable(obj), indent, 0)


# -- functions -----------------------------------------------------------------


def function_to_dict(f: GridFunction) -> dict:
    return {"x0": f.x0, "h": f.h, "values": [float(v) for v in f.values]}


def save_function(f: GridFunction, path) -> None:
    Path(path).write_text(dumps(function_to_dict(f)) + "\n")


def _function_from_csv(text: str) -> GridFunction:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise InvalidFunctionError("empty function file")
    head = [c.strip() for c in rows[0].split(",")]
    body = rows[1:]
    if [c.lower() for c in head] == ["x0", "h"]:
        if not body:
            raise InvalidFunctionError("CSV function file lacks the x0,h line")
        head = [c.strip() for c in body[0].split(",")]
        body = body[1:]
    try:
        x0, h = (float(c) for c in head)
        values = [float(r) for r in body]
    except ValueError as exc:
        raise InvalidFunctionError(f"malformed CSV function file: {exc}") from None
    return GridFunction(x0, h, values)


def load_function(path) -> GridFunction:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidFunctionError(f"cannot read function file {path}: {exc.strerror}") from None
    if path.suffix.lower() == ".csv" or not text.lstrip().startswith("{"):
        return _function_from_csv(text)
    try:
        obj = json.loads(text)
        return GridFunction(obj["x0"], obj["h"], obj["values"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InvalidFunctionError(f"malformed function file {path}: {exc}") from None


# -- matrices ------------------------------------------------------------------


def matrix_to_dict(A: ShiftMatrix) -> dict:
    return {"d": A.d, "n": A.n, "rows": A.entries.tolist()}


def load_matrix(path) -> ShiftMatrix:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise InvalidFunctionError(f"cannot read matrix file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidFunctionError(f"malformed matrix file {path}: {exc}") from None
    try:
        rows = obj["rows"]
        d, n = int(obj["d"]), int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidFunctionError(f"matrix file {path} needs d, n and rows: {exc}") from None
    A = ShiftMatrix(rows)
    if (A.d, A.n) != (d, n):
        raise InvalidFunctionError(f"matrix file declares {d}x{n} but rows are {A.d}x{A.n}")
    return A


# -- curves and reports --------------------------------------------------------


def write_curve_csv(points, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "g"])
            for t, g in points:
                tv = t.coords[0] if isinstance(t, ShiftPoint) else float(t)
                w.writerow([fmt_float(tv), fmt_float(g)])
    except OSError as exc:
        raise AutocorrError(f"cannot write curve to {path}: {exc.strerror}") from None


def read_curve_csv(path) -> list[tuple[float, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["t", "g"]:
        raise InvalidFunctionError("curve file must start with header t,g")
    return [(float(t), float(g)) for t, g in rows[1:]]


def functional_report_to_dict(rep: FunctionalReport) -> dict:
    return to_jsonable(asdict(rep) | {"argmin_t": list(rep.argmin_t.coords),
                                      "argmax_t": list(rep.argmax_t.coords)})
