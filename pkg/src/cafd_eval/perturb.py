"""Feature-space adversarial constructions.

The axis-permutation hack: PCA-rotate, normalize each axis, swap two
normalized components, and rotate back. The output keeps the sample mean
and covariance of the input (so any score built only on those moments is
blind to it) while scrambling class structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DataError, DimensionError
from .linalg import PcaModel
from .tensor_io import FeatureMatrix


@dataclass(frozen=True)
class HackRecipe:
    """Which two principal components to swap (deterministic, no RNG)."""

    swap_pair: tuple[int, int] = (0, 1)

    def __post_init__(self):
        a, b = self.swap_pair
        if a == b:
            raise DataError("swap pair must name two distinct components")
        if a < 0 or b < 0:
            raise DataError(f"swap pair must be nonnegative, got {self.swap_pair}")


def axis_permutation_hack(
    x,
    recipe: HackRecipe | None = None,
    basis: PcaModel | None = None,
) -> FeatureMatrix:
    """Swap two normalized principal axes and reconstruct.

    Fits a full PCA basis on the input (or reuses ``basis``), normalizes
    each projected axis to zero mean and unit variance, swaps the two
    chosen components, then inverts the normalization and the rotation.
    Applying the hack twice with the *same* basis recovers the input;
    refitting on hacked data may reorder equal-variance components.
    """
    a = linalg._as_2d(x)
    n, d = a.shape
    recipe = recipe or HackRecipe()
    if basis is None:
        basis, coords = linalg.pca(a, min(n, d))
    else:
        if basis.components.shape[1] != d:
            raise DimensionError(
                f"basis is for dimension {basis.components.shape[1]}, input has {d}"
            )
        coords = basis.transform(a)
    i, j = recipe.swap_pair
    k = coords.shape[1]
    if i >= k or j >= k:
        raise DataError(f"swap pair {recipe.swap_pair} out of range for {k} components")

    out = coords.copy()
    stats = {}
    for axis in (i, j):
        col = coords[:, axis]
        m, s = col.mean(), col.std()
        if s <= 0.0:
            raise DataError(f"component {axis} has zero variance; cannot normalize")
        stats[axis] = (m, s)
    zi = (coords[:, i] - stats[i][0]) / stats[i][1]
    zj = (coords[:, j] - stats[j][0]) / stats[j][1]
    out[:, i] = zj * stats[i][1] + stats[i][0]
    out[:, j] = zi * stats[j][1] + stats[j][0]
    return FeatureMatrix.from_array(basis.inverse_transform(out))


@dataclass(frozen=True)
class PreservationReport:
    """Deviation of first and second moments between two sample sets."""

    mean_max_dev: float
    cov_max_dev: float
    cov_max_rel_dev: float

    def to_json_dict(self) -> dict:
        return {
            "mean_max_dev": self.mean_max_dev,
            "cov_max_dev": self.cov_max_dev,
            "cov_max_rel_dev": self.cov_max_rel_dev,
        }


def mean_cov_preservation_check(x, x_hacked) -> PreservationReport:
    """Max deviation of mean and covariance between two equally-shaped sets.

    ``cov_max_rel_dev`` is relative to the largest covariance entry of the
    first set.
    """
    a = linalg._as_2d(x)
    b = linalg._as_2d(x_hacked)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    mean_dev = float(np.abs(linalg.mean_vector(a) - linalg.mean_vector(b)).max())
    ca = linalg.covariance(a)
    cb = linalg.covariance(b)
    cov_dev = float(np.abs(ca - cb).max())
    scale = max(float(np.abs(ca).max()), np.finfo(np.float64).tiny)
    return PreservationReport(mean_dev, cov_dev, cov_dev / scale)
