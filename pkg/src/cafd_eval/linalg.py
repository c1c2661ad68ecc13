"""Dense symmetric linear algebra underneath every metric.

Means and (weighted) covariances, symmetric eigendecomposition, PSD matrix
square roots, the trace of the cross-covariance square root, and PCA.
All computation is float64; covariances use population (weight-exact)
normalization so the uniform case agrees with the weighted formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, NumericalError
from .tensor_io import FeatureMatrix

# Eigenvalues of a nominally-PSD matrix in [-PSD_CLIP_REL * |lambda|_max, 0)
# are treated as round-off and clamped to zero; anything below is a hard error.
PSD_CLIP_REL = 1e-6

SYMMETRY_RTOL = 1e-9
WEIGHT_SUM_TOL = 1e-9


def _as_2d(x) -> np.ndarray:
    if isinstance(x, FeatureMatrix):
        return x.data
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D sample matrix, got ndim={a.ndim}")
    return a


def ensure_symmetric(a, *, context: str = "matrix") -> np.ndarray:
    """Validate symmetry within tolerance and return the symmetrized copy."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{context}: expected a square matrix, got shape {m.shape}")
    dev = np.abs(m - m.T)
    tol = SYMMETRY_RTOL * np.maximum(1.0, np.abs(m))
    if (dev > tol).any():
        i, j = np.argwhere(dev > tol)[0]
        raise DataError(
            f"{context}: not symmetric at ({i},{j}): {m[i, j]!r} vs {m[j, i]!r}"
        )
    return (m + m.T) / 2.0


def _validate_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise DimensionError(f"weights have shape {w.shape}, expected ({n},)")
    if not np.isfinite(w).all() or w.min() < 0.0:
        raise DataError("weights must be finite and nonnegative")
    s = w.sum()
    if abs(s - 1.0) > WEIGHT_SUM_TOL:
        raise DataError(f"weights sum to {s!r}, not 1 within {WEIGHT_SUM_TOL}")
    return w


def mean_vector(x, weights=None) -> np.ndarray:
    """Weighted sample mean sum_j w_j x_j; uniform weights when absent."""
    a = _as_2d(x)
    n = a.shape[0]
    if n == 0:
        raise DataError("cannot take the mean of an empty sample set")
    w = np.full(n, 1.0 / n) if weights is None else _validate_weights(weights, n)
    return w @ a


def covariance(x, weights=None, mean=None) -> np.ndarray:
    """Weighted population covariance sum_j w_j (x_j - mu)(x_j - mu)^T.

    Uniform weights 1/N when absent (population normalization, no bias
    correction: the uniform case must agree exactly with the weighted
    formula). ``mean`` may be supplied to reuse a precomputed center.
    """
    a = _as_2d(x)
    n = a.shape[0]
    if n == 0:
        raise DataError("cannot take the covariance of an empty sample set")
    w = np.full(n, 1.0 / n) if weights is None else _validate_weights(weights, n)
    mu = mean_vector(a, w) if mean is None else np.asarray(mean, dtype=np.float64)
    centered = a - mu
    c = (w[:, None] * centered).T @ centered
    return (c + c.T) / 2.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(a, *, context: str = "matrix") -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix, descending order."""
    m = ensure_symmetric(a, context=context)
    try:
        evals, evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{context}: eigensolver failed to converge: {exc}") from None
    return EigenDecomposition(evals[::-1].copy(), evecs[:, ::-1].copy())


def _clamped_psd_eigenvalues(evals: np.ndarray, *, context: str) -> np.ndarray:
    lam_max = float(np.abs(evals).max()) if evals.size else 0.0
    clip = PSD_CLIP_REL * lam_max
    lam_min = float(evals.min()) if evals.size else 0.0
    if lam_min < -clip:
        raise NumericalError(
            f"{context}: materially negative eigenvalue {lam_min!r} "
            f"(clip threshold {-clip!r}); matrix is not PSD"
        )
    return np.maximum(evals, 0.0)


def sqrtm_psd(a, *, context: str = "matrix") -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in ``[-clip, 0)`` with ``clip = PSD_CLIP_REL * |lambda|_max``
    are round-off and clamped to zero; below that raises NumericalError.
    """
    dec = sym_eig(a, context=context)
    lam = _clamped_psd_eigenvalues(dec.eigenvalues, context=context)
    q = dec.eigenvectors
    s = (q * np.sqrt(lam)) @ q.T
    return (s + s.T) / 2.0


def trace_sqrt_product(a, b) -> float:
    """Tr((A B)^1/2) for symmetric PSD A, B.

    Evaluated through the symmetrized form: the eigenvalues of
    A^1/2 B A^1/2 are the squared singular values of A^1/2 B^1/2, so the
    trace is the nuclear norm of that product. Never forms the raw
    nonsymmetric product A B; exactly symmetric in (A, B) up to round-off,
    and nonnegative by construction.
    """
    sa = sqrtm_psd(a, context="first factor")
    sb = sqrtm_psd(b, context="second factor")
    if sa.shape != sb.shape:
        raise DimensionError(f"factor shapes differ: {sa.shape} vs {sb.shape}")
    try:
        sigma = np.linalg.svd(sa @ sb, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from None
    return float(sigma.sum())


@dataclass(frozen=True)
class PcaModel:
    """Principal axes of a sample set.

    ``components`` holds orthonormal rows; ``explained_variance`` the
    matching population eigenvalues, sorted descending. Sign convention:
    in each component the entry of largest absolute value is positive,
    so outputs are reproducible byte-for-byte.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def transform(self, x) -> np.ndarray:
        return (_as_2d(x) - self.mean) @ self.components.T

    def inverse_transform(self, y) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) @ self.components + self.mean


def pca(x, k: int) -> tuple[PcaModel, np.ndarray]:
    """Top-k principal axes of the population covariance plus projections.

    Returns ``(model, coords)`` where ``coords`` is N x k.
    """
    a = _as_2d(x)
    n, d = a.shape
    if not 1 <= k <= min(n, d):
        raise DimensionError(f"k={k} out of range for {n} samples of dimension {d}")
    mu = mean_vector(a)
    dec = sym_eig(covariance(a, mean=mu), context="covariance")
    components = dec.eigenvectors[:, :k].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    explained = np.maximum(dec.eigenvalues[:k], 0.0)
    model = PcaModel(mu, components, explained)
    return model, model.transform(a)
