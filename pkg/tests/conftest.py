import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from cafd_eval import synth


def random_psd(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    b = rng.standard_normal((d, d))
    m = scale * (b @ b.T) / d
    return (m + m.T) / 2.0


def random_stochastic(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    r = rng.random((n, k)) + 1e-3
    return r / r.sum(axis=1, keepdims=True)


def orthogonal_cluster_means(k: int, d: int, separation: float) -> np.ndarray:
    """K cluster centers with exact pairwise distance ``separation``."""
    assert k <= d
    means = np.zeros((k, d))
    for i in range(k):
        means[i, i] = separation / np.sqrt(2.0)
    return means


def rotated_cluster_means(k: int, d: int, separation: float, rng) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return orthogonal_cluster_means(k, d, separation) @ q


def sample_clusters(k: int, d: int, separation: float, n: int, seed: int, rotate=False):
    """Balanced spherical GMM sample: (FeatureMatrix, LabelVector, one-hot)."""
    if rotate:
        means = rotated_cluster_means(k, d, separation, np.random.default_rng(seed + 1))
    else:
        means = orthogonal_cluster_means(k, d, separation)
    spec = synth.GmmSpec.create(k=k, dim=d, means=means, seed=seed)
    return synth.sample_gmm(spec, n)
