"""Minimal FVEC / labels file writers (and a reader for verification).

FVEC: 8 magic bytes ``FVEC1\\x00\\x00\\x00``, little-endian u32 n_rows and
n_cols, then row-major little-endian float32 values. Labels: one base-10
integer per line. These files are the only coupling to the evaluation
toolkit.
"""

from __future__ import annotations

import struct

import numpy as np

FVEC_MAGIC = b"FVEC1\x00\x00\x00"
_HEADER = struct.Struct("<8sII")


def write_fvec(data: np.ndarray, path) -> None:
    a = np.ascontiguousarray(data, dtype="<f4")
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FVEC_MAGIC, a.shape[0], a.shape[1]))
        fh.write(a.tobytes(order="C"))


def read_fvec(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, n_rows, n_cols = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != FVEC_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    expected = 4 * n_rows * n_cols
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n_rows, n_cols)


def write_labels(labels: np.ndarray, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for v in np.asarray(labels).ravel():
            fh.write(f"{int(v)}\n")
