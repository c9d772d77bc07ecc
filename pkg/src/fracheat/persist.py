"""Serialization of grid functions, arrays and reports.

Binary files hold raw little-endian complex128 samples in C order next to a
JSON sidecar (``<name>.json``) describing the grid; the round trip is
bit-exact.  The CSV form has columns ``index,re,im``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .quantize import AnisoGrid, GridFunction, LineGrid

SCHEMA = "fracheat.gridfunction/1"


def _grid_from_dict(desc: dict):
    kind = desc["type"]
    if kind == "AnisoGrid":
        return AnisoGrid(int(desc["n"]), float(desc["Lx"]), int(desc["Nx"]),
                         float(desc["Lt"]), int(desc["Nt"]), float(desc["d"]))
    if kind == "LineGrid":
        return LineGrid(float(desc["R"]), int(desc["N"]))
    raise ValueError(f"unknown grid type {kind!r}")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def save_gridfunction(u: GridFunction, path, fmt: str = "binary") -> Path:
    """Save ``u`` as ``path`` (binary or csv) and its descriptor as ``path.json``."""
    path = Path(path)
    vals = np.ascontiguousarray(u.values, dtype="<c16")
    if fmt == "binary":
        atomic_write_bytes(path, vals.tobytes(order="C"))
    elif fmt == "csv":
        flat = vals.ravel()
        lines = ["index,re,im"]
        lines += [f"{i},{float(z.real)!r},{float(z.imag)!r}" for i, z in enumerate(flat)]
        atomic_write_text(path, "\n".join(lines) + "\n")
    else:
        raise ValueError("fmt must be 'binary' or 'csv'")
    desc = {
        "schema": SCHEMA,
        "format": fmt,
        "grid": u.grid.describe(),
        "domain_tag": u.domain_tag,
        "shape": list(vals.shape),
        "real": bool(not np.iscomplexobj(u.values)),
        "sha256": sha256_file(path),
    }
    write_json(path.with_name(path.name + ".json"), desc)
    return path


def load_gridfunction(path) -> GridFunction:
    path = Path(path)
    desc = json.loads(path.with_name(path.name + ".json").read_text())
    if desc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported descriptor schema {desc.get('schema')!r}")
    grid = _grid_from_dict(desc["grid"])
    shape = tuple(desc["shape"])
    if desc["format"] == "binary":
        vals = np.frombuffer(path.read_bytes(), dtype="<c16").reshape(shape).copy()
    else:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows]).reshape(shape)
    if desc.get("real"):
        vals = vals.real.copy()
    return GridFunction(grid, vals, desc["domain_tag"])


def write_csv(path, header, rows) -> None:
    """Write rows to CSV deterministically (repr of floats)."""
    out = [",".join(header)]
    for r in rows:
        out.append(",".join(_fmt(v) for v in r))
    atomic_write_text(path, "\n".join(out) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
