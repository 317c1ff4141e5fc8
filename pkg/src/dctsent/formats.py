"""On-disk formats for sentence-vector matrices and linear maps.

SVEC (sentence vectors), little endian::

    b"SVEC" | u32 rows | u32 cols | u32 float width (4 or 8) | rows*cols floats, row-major

XMAP (linear map), little endian::

    b"XMAP" | u32 p | u8 solver id | f64 fit residual | p*p f64, row-major
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DataError, ParseError, UsageError

SVEC_MAGIC = b"SVEC"
XMAP_MAGIC = b"XMAP"
_SVEC_HEADER = struct.Struct("<4sIII")
_XMAP_HEADER = struct.Struct("<4sIBd")
SOLVER_IDS = {"least-squares": 0, "procrustes": 1}
SOLVER_NAMES = {v: k for k, v in SOLVER_IDS.items()}


def write_svec(path, matrix, float_width: int = 8) -> None:
    if float_width not in (4, 8):
        raise UsageError("float width must be 4 or 8")
    m = np.atleast_2d(np.asarray(matrix))
    dtype = "<f4" if float_width == 4 else "<f8"
    with open(path, "wb") as f:
        f.write(_SVEC_HEADER.pack(SVEC_MAGIC, m.shape[0], m.shape[1], float_width))
        f.write(np.ascontiguousarray(m, dtype=dtype).tobytes())


def read_svec(path) -> np.ndarray:
    with open(path, "rb") as f:
        head = f.read(_SVEC_HEADER.size)
        if len(head) < _SVEC_HEADER.size:
            raise ParseError(f"{path}: truncated SVEC header")
        magic, rows, cols, width = _SVEC_HEADER.unpack(head)
        if magic != SVEC_MAGIC:
            raise ParseError(f"{path}: not an SVEC file")
        if width not in (4, 8):
            raise ParseError(f"{path}: unsupported float width {width}")
        data = f.read()
    dtype = np.dtype("<f4" if width == 4 else "<f8")
    if len(data) != rows * cols * width:
        raise ParseError(f"{path}: expected {rows}x{cols} values, payload has {len(data)} bytes")
    return np.frombuffer(data, dtype=dtype).reshape(rows, cols).astype(dtype.newbyteorder("="))


def write_tsv(path, matrix) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as f:
        for row in m:
            f.write("\t".join("%.9g" % x for x in row) + "\n")


def read_tsv(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split("\t")])
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}", line=lineno) from None
            if len(rows[-1]) != len(rows[0]):
                raise ParseError(f"{path}: ragged row", line=lineno)
    if not rows:
        raise DataError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def write_vectors(path, matrix, fmt: str = "tsv", float_width: int = 8) -> None:
    if fmt == "tsv":
        write_tsv(path, matrix)
    elif fmt == "bin":
        write_svec(path, matrix, float_width)
    else:
        raise UsageError(f"unknown vector format {fmt!r}")


def read_vectors(path) -> np.ndarray:
    """Read SVEC or TSV, detected by the magic bytes."""
    with open(path, "rb") as f:
        magic = f.read(4)
    if magic == SVEC_MAGIC:
        return read_svec(path).astype(np.float64)
    return read_tsv(path)


def write_xmap(path, matrix, solver: str, fit_residual: float) -> None:
    w = np.asarray(matrix, dtype="<f8")
    p = w.shape[0]
    if w.shape != (p, p):
        raise UsageError("map matrix must be square")
    with open(path, "wb") as f:
        f.write(_XMAP_HEADER.pack(XMAP_MAGIC, p, SOLVER_IDS[solver], float(fit_residual)))
        f.write(np.ascontiguousarray(w).tobytes())


def read_xmap(path) -> tuple[np.ndarray, str, float]:
    with open(path, "rb") as f:
        head = f.read(_XMAP_HEADER.size)
        if len(head) < _XMAP_HEADER.size:
            raise ParseError(f"{path}: truncated XMAP header")
        magic, p, solver_id, residual = _XMAP_HEADER.unpack(head)
        if magic != XMAP_MAGIC:
            raise ParseError(f"{path}: not an XMAP file")
        if solver_id not in SOLVER_NAMES:
            raise ParseError(f"{path}: unknown solver id {solver_id}")
        data = f.read()
    if len(data) != p * p * 8:
        raise ParseError(f"{path}: expected {p}x{p} map, payload has {len(data)} bytes")
    w = np.frombuffer(data, dtype="<f8").reshape(p, p).astype(np.float64)
    return w, SOLVER_NAMES[solver_id], residual
