"""Deterministic CSV/JSON serialization with atomic writes.

All floats are written with 17 significant digits so that a write/read
round trip reproduces IEEE doubles exactly.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def atomic_write_text(path, text: str) -> Path:
    """Write via a temp file in the same directory, then rename over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return _Float17(v)
    return obj


class _Float17(float):
    def __repr__(self):
        return format(float(self), ".17g")


def dumps_json(obj) -> str:
    """Pretty JSON with sorted keys and 17-significant-digit floats."""
    return _json_with_17g(_to_jsonable(obj)) + "\n"


def _json_with_17g(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(k)}: {_json_with_17g(obj[k], indent + 1)}' for k in sorted(obj)
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [f"{pad}  {_json_with_17g(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, _Float17):
        return repr(obj)
    return json.dumps(obj)


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, header, columns, meta: dict | None = None) -> Path:
    """Write equal-length columns; `meta` goes first as '# key=value' lines."""
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value if isinstance(value, str) else fmt(value)}")
    lines.append(",".join(header))
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns must have equal length")
    formatted = [[fmt(v) for v in c.tolist()] for c in cols]
    lines.extend(",".join(row) for row in zip(*formatted))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path):
    """Inverse of write_csv: returns (meta: dict[str, str], columns: dict[str, ndarray])."""
    meta: dict[str, str] = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: no header line")
    columns = {}
    for i, name in enumerate(header):
        raw = [r[i] for r in rows]
        try:
            columns[name] = np.array(raw, dtype=float)
        except ValueError:
            columns[name] = np.array(raw, dtype=str)
    return meta, columns
