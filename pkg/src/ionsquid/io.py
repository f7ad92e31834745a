"""Plot-ready CSV and JSON writers with a commented metadata header."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def metadata_lines(metadata: dict) -> list[str]:
    meta = {"tool": "ionsquid", "version": __version__, **metadata}
    return [f"# {key}: {json.dumps(meta[key], sort_keys=True, default=_jsonable)}" for key in meta]


def write_csv(path, columns, rows, metadata=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in metadata_lines(metadata or {}):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (metadata_lines, header, rows-as-lists-of-str)."""
    meta, body = [], []
    with open(path) as fh:
        for line in fh:
            (meta if line.startswith("#") else body).append(line.rstrip("\n"))
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(path, payload: dict, metadata=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"metadata": {"tool": "ionsquid", "version": __version__, **(metadata or {})}}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_jsonable, allow_nan=True)
        fh.write("\n")
    return path
