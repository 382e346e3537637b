"""Binary snapshots and CSV diagnostics.

Snapshot layout (little-endian, no padding)::

    b"NLS1"  u32 version=1  u32 kind  u32 d  d*u32 n  f64 L  f64 t
    n**d complex samples as (re, im) f64 pairs, axis 0 varying fastest
"""
from __future__ import annotations

import csv
import math
import struct
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .diagnostics import DiagnosticRecord
from .errors import BadMagicError, PayloadError, SerializationError, VersionError
from .grid import ComplexField, Grid

MAGIC = b"NLS1"
VERSION = 1
KIND_FIELD = 0
KIND_GROUND_STATE = 1
CSV_SCHEMA = "# nlslab diagnostics schema 1"


def encode_snapshot(f: ComplexField, kind: int = KIND_FIELD) -> bytes:
    g = f.grid
    head = MAGIC + struct.pack("<III", VERSION, kind, g.d)
    head += struct.pack(f"<{g.d}I", *g.shape) + struct.pack("<dd", g.L, f.t)
    return head + np.asarray(f.flat(), dtype="<c16").tobytes()


def write_snapshot(f: ComplexField, path, kind: int = KIND_FIELD) -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(f, kind))
    return path


def decode_snapshot(data: bytes):
    """Returns ``(field, kind)``."""
    if len(data) < 4:
        raise PayloadError("file too short for a snapshot header")
    magic = data[:4]
    if magic != MAGIC:
        if magic[:3] == b"NLS":
            raise VersionError(f"unsupported snapshot format {magic!r}")
        raise BadMagicError(f"not a snapshot file (magic {magic!r})")
    if len(data) < 16:
        raise PayloadError("truncated snapshot header")
    version, kind, d = struct.unpack_from("<III", data, 4)
    if version != VERSION:
        raise VersionError(f"snapshot version {version} is not supported (expected {VERSION})")
    if d not in (1, 2, 3):
        raise PayloadError(f"invalid dimension {d} in snapshot header")
    off = 16
    if len(data) < off + 4 * d + 16:
        raise PayloadError("truncated snapshot header")
    ns = struct.unpack_from(f"<{d}I", data, off)
    off += 4 * d
    L, t = struct.unpack_from("<dd", data, off)
    off += 16
    if len(set(ns)) != 1:
        raise PayloadError(f"non-cubic lattice {ns} is not supported")
    expected = 16 * int(np.prod(ns, dtype=np.int64))
    payload = data[off:]
    if len(payload) != expected:
        raise PayloadError(f"payload holds {len(payload)} bytes, header implies {expected}")
    try:
        grid = Grid(d, ns[0], L)
    except ValueError as exc:
        raise PayloadError(f"invalid grid in snapshot header: {exc}") from exc
    samples = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    return ComplexField(grid, samples.reshape(grid.shape, order="F"), t), kind


def read_snapshot(path) -> ComplexField:
    return decode_snapshot(Path(path).read_bytes())[0]


def read_snapshot_kind(path):
    return decode_snapshot(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# CSV

_VECTOR_FIELDS = ("momentum", "x_center", "xi")


def diagnostic_columns(d: int) -> List[str]:
    cols = []
    for name in DiagnosticRecord.field_names():
        if name in _VECTOR_FIELDS:
            cols.extend(f"{name}_{a}" for a in range(d))
        else:
            cols.append(name)
    return cols


def _fmt(value, key: str) -> str:
    if value is None:
        return ""
    v = float(value)
    if not math.isfinite(v):
        raise SerializationError(f"refusing to serialize non-finite value in column {key!r}")
    return "%.17g" % v


def _record_cells(rec: DiagnosticRecord, d: int) -> List[str]:
    cells = []
    for name in DiagnosticRecord.field_names():
        val = getattr(rec, name)
        if name in _VECTOR_FIELDS:
            vals = [None] * d if val is None else list(val)
            if len(vals) != d:
                raise SerializationError(f"{name} has {len(vals)} components, expected {d}")
            cells.extend(_fmt(v, f"{name}_{a}") for a, v in enumerate(vals))
        else:
            cells.append(_fmt(val, name))
    return cells


def write_diagnostics(records: Sequence[DiagnosticRecord], path, d: Optional[int] = None,
                      append: bool = False) -> Path:
    """One CSV row per record; absent optional values are empty cells."""
    path = Path(path)
    if d is None:
        d = len(records[0].momentum) if records else 1
    rows = [_record_cells(r, d) for r in records]
    if append and path.exists():
        with path.open("a", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        return path
    with path.open("w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(diagnostic_columns(d))
        w.writerows(rows)
    return path


def read_diagnostics(path) -> List[DiagnosticRecord]:
    with Path(path).open(newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    out = []
    for row in reader:
        cell = dict(zip(header, row))
        kw = {}
        for name in DiagnosticRecord.field_names():
            if name in _VECTOR_FIELDS:
                keys = sorted((k for k in header if k.startswith(name + "_")),
                              key=lambda k: int(k.rsplit("_", 1)[1]))
                vals = [cell[k] for k in keys]
                kw[name] = None if all(v == "" for v in vals) else tuple(float(v) for v in vals)
            else:
                v = cell[name]
                kw[name] = None if v == "" else float(v)
        out.append(DiagnosticRecord(**kw))
    return out
