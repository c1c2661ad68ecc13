"""Reading and writing of feature matrices, labels, and class posteriors.

On-disk formats
---------------
FVEC binary: 8 magic bytes ``FVEC1\\x00\\x00\\x00``, then two little-endian
u32 fields (``n_rows``, ``n_cols``), then ``n_rows * n_cols`` little-endian
float32 values in row-major order.

Labels: plain text, one base-10 integer per line, newline-terminated.

CSV fallback (selected by a ``.csv`` extension): one row per line,
comma-separated decimal reals. Hand-authorable fixtures for tests.

Storage is float32; everything is lifted to float64 in memory.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, FormatError, TruncationError

FVEC_MAGIC = b"FVEC1\x00\x00\x00"
_HEADER = struct.Struct("<8sII")

# Tolerance for row sums of stored posteriors; float32 storage cannot hold
# exact simplex values, so rows are renormalized after validation.
ROW_SUM_TOL = 1e-6
MARGINAL_SUM_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D matrix of encoded features, one sample per row."""

    data: np.ndarray

    @classmethod
    def from_array(cls, arr, *, context: str = "feature matrix") -> "FeatureMatrix":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError(f"{context}: expected a 2-D array, got ndim={a.ndim}")
        bad = ~np.isfinite(a)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(f"{context}: non-finite value at row {r}, column {c}")
        return cls(_freeze(a.copy()))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Integer class ids, one per sample."""

    labels: np.ndarray

    @classmethod
    def from_array(cls, arr, *, context: str = "labels") -> "LabelVector":
        a = np.asarray(arr)
        if a.ndim != 1:
            raise DimensionError(f"{context}: expected a 1-D array, got ndim={a.ndim}")
        if a.size and not np.issubdtype(a.dtype, np.integer):
            if not np.all(a == np.floor(a)):
                raise DataError(f"{context}: labels must be integers")
        a = a.astype(np.int64)
        if a.size and a.min() < 0:
            raise DataError(f"{context}: negative label {a.min()}")
        return cls(_freeze(a))

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class ProbabilityMatrix:
    """N x K row-stochastic matrix of class posteriors p(y|x).

    Rows are validated to sum to 1 within ``ROW_SUM_TOL`` and then
    renormalized to exact unit sum.
    """

    data: np.ndarray

    @classmethod
    def from_array(cls, arr, *, context: str = "probability matrix") -> "ProbabilityMatrix":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError(f"{context}: expected a 2-D array, got ndim={a.ndim}")
        if not np.isfinite(a).all():
            raise DataError(f"{context}: non-finite entries")
        if a.size and (a.min() < 0.0 or a.max() > 1.0):
            raise DataError(f"{context}: entries outside [0, 1]")
        sums = a.sum(axis=1)
        off = np.abs(sums - 1.0)
        if a.size and off.max() > ROW_SUM_TOL:
            r = int(np.argmax(off))
            raise DataError(
                f"{context}: row {r} sums to {sums[r]:.8f}, not 1 within {ROW_SUM_TOL}"
            )
        out = a.copy()
        if a.size:
            out /= sums[:, None]
        return cls(_freeze(out))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_classes(self) -> int:
        return self.data.shape[1]

    def marginal(self) -> "LabelMarginal":
        """Column means: the label marginal p(y) implied by the posteriors."""
        if self.n_samples == 0:
            raise DataError("cannot take the marginal of an empty probability matrix")
        return LabelMarginal.from_array(self.data.mean(axis=0))


@dataclass(frozen=True)
class LabelMarginal:
    """Distribution over K class labels."""

    probs: np.ndarray

    @classmethod
    def from_array(cls, arr, *, context: str = "label marginal") -> "LabelMarginal":
        p = np.asarray(arr, dtype=np.float64)
        if p.ndim != 1:
            raise DimensionError(f"{context}: expected a 1-D array, got ndim={p.ndim}")
        if not np.isfinite(p).all() or (p.size and p.min() < 0.0):
            raise DataError(f"{context}: entries must be finite and nonnegative")
        s = p.sum()
        if abs(s - 1.0) > MARGINAL_SUM_TOL:
            raise DataError(f"{context}: sums to {s!r}, not 1 within {MARGINAL_SUM_TOL}")
        return cls(_freeze(p / s))

    @property
    def n_classes(self) -> int:
        return self.probs.shape[0]


def _is_csv(path) -> bool:
    return os.path.splitext(str(path))[1].lower() == ".csv"


def _read_matrix_csv(path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise TruncationError(
                    f"{path}: line {lineno} has {len(row)} fields, expected {width}"
                )
            rows.append(row)
    if not rows:
        return np.empty((0, 0), dtype=np.float64)
    return np.asarray(rows, dtype=np.float64)


def _read_matrix_fvec(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"{path}: file shorter than the {_HEADER.size}-byte header")
        magic, n_rows, n_cols = _HEADER.unpack(header)
        if magic != FVEC_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    expected = 4 * n_rows * n_cols
    if len(payload) != expected:
        raise TruncationError(
            f"{path}: header declares {n_rows}x{n_cols} "
            f"({expected} payload bytes) but file holds {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f4")
    return values.astype(np.float64).reshape(n_rows, n_cols)


def _read_matrix(path) -> np.ndarray:
    if _is_csv(path):
        return _read_matrix_csv(path)
    return _read_matrix_fvec(path)


def _write_matrix(data: np.ndarray, path) -> None:
    if _is_csv(path):
        with open(path, "w", encoding="ascii") as fh:
            for row in np.asarray(data, dtype=np.float64):
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")
        return
    a = np.ascontiguousarray(data, dtype="<f4")
    n_rows, n_cols = a.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FVEC_MAGIC, n_rows, n_cols))
        fh.write(a.tobytes(order="C"))


def read_feature_matrix(path) -> FeatureMatrix:
    """Read an FVEC (or ``.csv``) file into a validated FeatureMatrix."""
    return FeatureMatrix.from_array(_read_matrix(path), context=str(path))


def write_feature_matrix(m: FeatureMatrix, path) -> None:
    """Write a FeatureMatrix; FVEC payload is float32 little-endian."""
    _write_matrix(m.data, path)


def read_probabilities(path) -> ProbabilityMatrix:
    """Read class posteriors; rows are validated row-stochastic."""
    return ProbabilityMatrix.from_array(_read_matrix(path), context=str(path))


def write_probabilities(p: ProbabilityMatrix, path) -> None:
    _write_matrix(p.data, path)


def read_labels(path) -> LabelVector:
    """Read a label file: one base-10 integer per line."""
    values: list[int] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line, 10))
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: not an integer: {line!r}") from None
    return LabelVector.from_array(np.asarray(values, dtype=np.int64), context=str(path))


def write_labels(v: LabelVector, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for label in v.labels:
            fh.write(f"{int(label)}\n")


def one_hot(labels: LabelVector, k: int) -> ProbabilityMatrix:
    """Hard labels as a degenerate posterior matrix: row i is e_{labels[i]}."""
    ids = labels.labels
    if ids.size and ids.max() >= k:
        raise DataError(f"label {int(ids.max())} out of range for k={k}")
    out = np.zeros((ids.shape[0], k), dtype=np.float64)
    out[np.arange(ids.shape[0]), ids] = 1.0
    return ProbabilityMatrix.from_array(out)


def validate_pair(
    real: FeatureMatrix,
    gen: FeatureMatrix,
    real_p: ProbabilityMatrix,
    gen_p: ProbabilityMatrix,
) -> None:
    """Cross-validate a (real, generated) evaluation quadruple.

    Checks equal feature dimension, equal class count, and matching sample
    counts between each feature matrix and its posterior matrix.
    """
    if real.dim != gen.dim:
        raise DimensionError(
            f"feature dimension mismatch: real is {real.n_samples}x{real.dim}, "
            f"generated is {gen.n_samples}x{gen.dim}"
        )
    if real_p.n_classes != gen_p.n_classes:
        raise DimensionError(
            f"class count mismatch: real posteriors have K={real_p.n_classes}, "
            f"generated have K={gen_p.n_classes}"
        )
    if real.n_samples != real_p.n_samples:
        raise DimensionError(
            f"real side: {real.n_samples} feature rows vs {real_p.n_samples} posterior rows"
        )
    if gen.n_samples != gen_p.n_samples:
        raise DimensionError(
            f"generated side: {gen.n_samples} feature rows vs {gen_p.n_samples} posterior rows"
        )
