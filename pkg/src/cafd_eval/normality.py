"""Normality diagnostics for feature sets.

Anderson-Darling on leading PCA components (composite case: mean and
variance estimated from the sample) and Mardia's multivariate skewness /
kurtosis test on a PCA projection. Both fit PCA on the tested set itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import chi2, norm

from . import linalg
from .errors import DataError, DimensionError, NumericalError
from .tensor_io import FeatureMatrix

AD_MIN_SAMPLES = 8
DEFAULT_AD_COMPONENTS = 10
DEFAULT_MARDIA_COMPONENTS = 5


@dataclass(frozen=True)
class AdTestResult:
    """Anderson-Darling composite-normality result.

    ``a_squared`` is the small-sample-corrected statistic
    A*^2 = A^2 (1 + 0.75/n + 2.25/n^2).
    """

    a_squared: float
    p_value: float

    def to_json_dict(self) -> dict:
        return {"a_squared": self.a_squared, "p_value": self.p_value}


@dataclass(frozen=True)
class MardiaResult:
    """Mardia multivariate skewness and kurtosis result."""

    skewness_stat: float
    skewness_p: float
    kurtosis_z: float
    kurtosis_p: float

    @property
    def headline_p(self) -> float:
        """Conservative single p-value: min of the two component p-values."""
        return min(self.skewness_p, self.kurtosis_p)

    def to_json_dict(self) -> dict:
        return {
            "skewness_stat": self.skewness_stat,
            "skewness_p": self.skewness_p,
            "kurtosis_z": self.kurtosis_z,
            "kurtosis_p": self.kurtosis_p,
            "headline_p": self.headline_p,
        }


def _ad_p_value(a: float) -> float:
    # Piecewise exponential approximation for the composite case
    # (mean and variance estimated), keyed on A*^2.
    if a < 0.2:
        p = 1.0 - np.exp(-13.436 + 101.14 * a - 223.73 * a * a)
    elif a < 0.34:
        p = 1.0 - np.exp(-8.318 + 42.796 * a - 59.938 * a * a)
    elif a < 0.6:
        p = np.exp(0.9177 - 4.279 * a - 1.38 * a * a)
    elif a <= 13.0:
        p = np.exp(1.2937 - 5.709 * a + 0.0186 * a * a)
    else:
        p = 0.0  # below 5e-31
    return float(min(max(p, 0.0), 1.0))


def ad_test(samples) -> AdTestResult:
    """Anderson-Darling test for normality with estimated mean and variance.

    Standardizes the sample, accumulates A^2 from the order statistics via
    log-CDF/log-SF (cancellation-free tails), applies the small-sample
    correction, and maps to a p-value through the standard piecewise
    exponential approximation.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-D sample vector, got ndim={x.ndim}")
    n = x.shape[0]
    if n < AD_MIN_SAMPLES:
        raise DataError(f"need at least {AD_MIN_SAMPLES} samples, got {n}")
    s = x.std(ddof=1)
    if s <= 0.0:
        raise DataError("sample variance is zero")
    w = np.sort((x - x.mean()) / s)
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1.0) / n * (norm.logcdf(w) + norm.logsf(w[::-1])))
    a2_star = float(a2 * (1.0 + 0.75 / n + 2.25 / n**2))
    return AdTestResult(a2_star, _ad_p_value(a2_star))


def ad_test_pca(x, n_components: int | None = None) -> tuple[float, list[AdTestResult]]:
    """AD test on each of the leading PCA components, p-values averaged.

    ``n_components`` defaults to min(10, N, D); an explicit value must not
    exceed min(N, D).
    """
    a = linalg._as_2d(x)
    n, d = a.shape
    limit = min(n, d)
    m = min(DEFAULT_AD_COMPONENTS, limit) if n_components is None else n_components
    if not 1 <= m <= limit:
        raise DimensionError(f"n_components={m} out of range for {n}x{d} input")
    _, coords = linalg.pca(a, m)
    results = [ad_test(coords[:, j]) for j in range(m)]
    avg_p = float(np.mean([r.p_value for r in results]))
    return avg_p, results


def mardia_test(x, n_components: int | None = None, use_pca: bool = True) -> MardiaResult:
    """Mardia skewness/kurtosis test on a PCA projection.

    Skewness: b1 = (1/n^2) sum_ij [(x_i-mu)^T S^-1 (x_j-mu)]^3 with
    n b1 / 6 referred to chi^2 with p(p+1)(p+2)/6 degrees of freedom.
    Kurtosis: b2 = (1/n) sum_i [(x_i-mu)^T S^-1 (x_i-mu)]^2 with
    z = (b2 - p(p+2)) / sqrt(8 p (p+2) / n) referred to N(0,1), two-sided.
    Asymptotic references (no small-sample correction); S is the
    population covariance. ``use_pca=False`` tests the input as-is.
    """
    a = linalg._as_2d(x)
    n, d = a.shape
    if use_pca:
        limit = min(n, d)
        p_dim = min(DEFAULT_MARDIA_COMPONENTS, limit) if n_components is None else n_components
        if not 1 <= p_dim <= limit:
            raise DimensionError(f"n_components={p_dim} out of range for {n}x{d} input")
        if n <= p_dim + 1:
            raise DataError(f"need more than {p_dim + 1} samples, got {n}")
        _, y = linalg.pca(a, p_dim)
    else:
        y = a
        p_dim = d
        if n <= p_dim + 1:
            raise DataError(f"need more than {p_dim + 1} samples, got {n}")
    yc = y - y.mean(axis=0)
    s = yc.T @ yc / n
    evals_s = np.linalg.eigvalsh(s)
    # rank-deficient data projects to round-off variances, not exact zeros
    if evals_s[0] <= 1e-12 * max(evals_s[-1], np.finfo(np.float64).tiny):
        raise NumericalError("projected covariance is singular")
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        raise NumericalError("projected covariance is singular") from None
    t = solve_triangular(chol, yc.T, lower=True).T

    # b1 = ||M||_F^2 with M the third moment tensor of the whitened data:
    # sum_ij (t_i . t_j)^3 expands into sum_abc (sum_i t_ia t_ib t_ic)^2.
    m3 = np.einsum("ia,ib,ic->abc", t, t, t) / n
    b1 = float(np.sum(m3 * m3))
    d2 = np.einsum("ij,ij->i", t, t)
    b2 = float(np.mean(d2 * d2))

    skew_stat = n * b1 / 6.0
    skew_df = p_dim * (p_dim + 1) * (p_dim + 2) / 6.0
    skew_p = float(chi2.sf(skew_stat, skew_df))
    kurt_z = float((b2 - p_dim * (p_dim + 2)) / np.sqrt(8.0 * p_dim * (p_dim + 2) / n))
    kurt_p = float(2.0 * norm.sf(abs(kurt_z)))
    return MardiaResult(skew_stat, skew_p, kurt_z, kurt_p)


def split_random(x, k: int, seed: int) -> list[FeatureMatrix]:
    """Disjoint near-equal random partition (sizes differ by at most 1)."""
    a = linalg._as_2d(x)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"cannot split {n} samples into {k} sets")
    rng = np.random.default_rng(seed)
    parts = np.array_split(rng.permutation(n), k)
    return [FeatureMatrix.from_array(a[idx]) for idx in parts]
