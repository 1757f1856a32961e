"""CSV tables with '#' metadata headers, written atomically."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeError

FLOAT_FMT = ".17g"  # enough digits for an exact double round-trip


@dataclass(frozen=True)
class CurveTable:
    columns: tuple
    data: np.ndarray  # shape (rows, len(columns))

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if data.ndim != 2 or data.shape[1] != len(self.columns):
            raise ShapeError(f"{len(self.columns)} columns but data has shape {data.shape}")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "data", data)

    @classmethod
    def from_columns(cls, **cols):
        lengths = {len(np.atleast_1d(v)) for v in cols.values()}
        if len(lengths) != 1:
            raise ShapeError(f"columns have unequal lengths {sorted(lengths)}")
        return cls(tuple(cols), np.column_stack([np.asarray(v, float) for v in cols.values()]))

    def __getitem__(self, name) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), FLOAT_FMT)
    return str(v)


def atomic_write_text(path, text: str):
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


def meta_lines(meta: dict):
    return [f"# {k}={_fmt(v)}" for k, v in meta.items()]


def write_csv(path, table: CurveTable, meta: dict | None = None):
    lines = meta_lines(meta or {})
    lines.append(",".join(table.columns))
    lines.extend(",".join(format(x, FLOAT_FMT) for x in row) for row in table.data)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return Path(path)


def write_meta(path, meta: dict, header: dict | None = None):
    lines = meta_lines(header or {})
    lines.extend(f"{k}={_fmt(v)}" for k, v in meta.items())
    atomic_write_text(path, "\n".join(lines) + "\n")
    return Path(path)


def read_csv(path):
    """Return ``(CurveTable, meta)`` from a file written by ``write_csv``."""
    meta, rows, columns = {}, [], None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif columns is None:
                columns = tuple(line.split(","))
            else:
                rows.append([float(x) for x in line.split(",")])
    return CurveTable(columns, np.array(rows, dtype=float).reshape(-1, len(columns))), meta


def read_meta(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                line = line[1:].strip()
            k, sep, v = line.partition("=")
            if sep:
                out[k] = v
    return out
