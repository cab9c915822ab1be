"""JSON and CSV encodings of result dictionaries.

Floats are rounded to 9 significant digits.  The CSV form has one row per
scalar leaf, ``path,value``, where ``path`` joins dictionary keys and list
indices with dots (``hessian.0.1``); `from_csv` rebuilds the nested object.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

SIG_DIGITS = 9


def clean(obj):
    """Convert numpy containers/scalars to plain Python, rounding floats."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    return obj


def to_json(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _leaves(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _leaves(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        if not obj:
            yield prefix + ".[]", ""
        for i, v in enumerate(obj):
            yield from _leaves(v, f"{prefix}.{i}" if prefix else str(i))
    else:
        yield prefix, obj


def to_csv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "value"])
    for path, val in _leaves(clean(obj)):
        w.writerow([path, "" if val is None else json.dumps(val) if not isinstance(val, str) else val])
    return buf.getvalue()


def _parse_scalar(text: str):
    if text == "":
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def from_csv(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["path", "value"]:
        raise ValueError("expected a 'path,value' header")
    root: dict = {}
    for path, raw in rows[1:]:
        parts = path.split(".")
        if parts[-1] == "[]":
            _assign(root, parts[:-1], [])
        else:
            _assign(root, parts, _parse_scalar(raw))
    return _listify(root)


def _assign(root, parts, value):
    node = root
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def _listify(node):
    if not isinstance(node, dict):
        return node
    if node and all(k.isdigit() for k in node):
        return [_listify(node[k]) for k in sorted(node, key=int)]
    return {k: _listify(v) for k, v in node.items()}


def history_csv(history) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start", "penalty", "iteration", "objective", "perimeter", "measure_error"])
    for h in history:
        w.writerow([h.start, f"{h.penalty:.{SIG_DIGITS}g}", h.iteration, f"{h.objective:.{SIG_DIGITS}g}",
                    f"{h.perimeter:.{SIG_DIGITS}g}", f"{h.measure_error:.{SIG_DIGITS}g}"])
    return buf.getvalue()
