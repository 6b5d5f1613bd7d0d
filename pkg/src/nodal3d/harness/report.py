"""JSON and CSV output with 17-significant-digit floats."""

import csv
import json
import math
from pathlib import Path

import numpy as np


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj, indent=2, _level=0):
    """Serialize ``obj`` as JSON, writing every float with 17 significant digits.

    numpy scalars and arrays are converted; dataclass-like objects must be
    turned into dicts beforehand (``as_dict``).
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if hasattr(obj, "as_dict"):
        return dumps(obj.as_dict(), indent, _level)
    return json.dumps(str(obj))


def write_json(path, obj):
    path = Path(path)
    if not path.parent.is_dir():
        raise FileNotFoundError(f"output directory {path.parent} does not exist")
    path.write_text(dumps(obj) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, columns, rows):
    path = Path(path)
    if not path.parent.is_dir():
        raise FileNotFoundError(f"output directory {path.parent} does not exist")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        cols = next(r)
        rows = [[float(v) for v in row] for row in r]
    return cols, rows
