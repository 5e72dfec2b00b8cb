"""Binary snapshots and CSV reports, written atomically."""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .grid import GridSpec

MAGIC = b"GBBM1\x00\x00\x00"
# magic, N1, N2, L1, L2, t, nu1, flux name
_HEADER = struct.Struct("<8sII4d32s")
HEADER_SIZE = _HEADER.size  # 80 bytes


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write ``data`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class Snapshot:
    N1: int
    N2: int
    L1: float
    L2: float
    t: float
    nu1: float
    flux_name: str
    v: np.ndarray
    u: np.ndarray


def encode_snapshot(grid: GridSpec, t: float, nu1: float, flux_name: str,
                    v: np.ndarray, u: np.ndarray) -> bytes:
    name = flux_name.encode("ascii")
    if len(name) > 32:
        raise ValueError(f"flux name longer than 32 bytes: {flux_name!r}")
    header = _HEADER.pack(MAGIC, grid.N1, grid.N2, grid.L1, grid.L2, t, nu1, name)
    payload = [np.ascontiguousarray(grid.check(a), dtype="<f8").tobytes() for a in (v, u)]
    return header + payload[0] + payload[1]


def write_snapshot(path, grid: GridSpec, t: float, nu1: float, flux_name: str,
                   v: np.ndarray, u: np.ndarray) -> None:
    atomic_write(path, encode_snapshot(grid, t, nu1, flux_name, v, u))


def read_snapshot(path) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise ValueError("file shorter than the snapshot header")
    magic, n1, n2, l1, l2, t, nu1, name = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    count = n1 * (n2 - 1)
    if len(data) != HEADER_SIZE + 2 * count * 8:
        raise ValueError(f"payload is {len(data) - HEADER_SIZE} bytes, expected {2 * count * 8}")
    arr = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE).astype(float)
    v = arr[:count].reshape(n1, n2 - 1)
    u = arr[count:].reshape(n1, n2 - 1)
    return Snapshot(n1, n2, l1, l2, t, nu1, name.rstrip(b"\x00").decode("ascii"), v, u)


def format_float(x: float) -> str:
    return "%.17g" % x


def csv_bytes(columns: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else format_float(float(c)) for c in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write(path, csv_bytes(columns, rows))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Numeric CSV as ``(columns, array)``; string cells are not supported."""
    text = Path(path).read_text(encoding="ascii").splitlines()
    columns = text[0].split(",")
    rows = [[float(c) for c in line.split(",")] for line in text[1:] if line]
    return columns, np.array(rows, dtype=float).reshape(len(rows), len(columns))
