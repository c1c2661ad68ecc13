"""Synthetic feature-distribution generator.

Configurable Gaussian mixtures plus the two failure modes the evaluation
framework must catch: mode dropping (a class vanishes from the generated
set) and mode collapse (two classes blend into a mixed mode).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DataError, DimensionError
from .tensor_io import FeatureMatrix, LabelMarginal, LabelVector, ProbabilityMatrix, one_hot


@dataclass(frozen=True)
class GmmSpec:
    """A K-component Gaussian mixture scenario, serializable as JSON."""

    k: int
    dim: int
    means: np.ndarray
    covariances: np.ndarray
    priors: LabelMarginal
    seed: int

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        if means.shape != (self.k, self.dim):
            raise DimensionError(
                f"means have shape {means.shape}, expected ({self.k}, {self.dim})"
            )
        covs = np.asarray(self.covariances, dtype=np.float64)
        if covs.shape != (self.k, self.dim, self.dim):
            raise DimensionError(
                f"covariances have shape {covs.shape}, expected "
                f"({self.k}, {self.dim}, {self.dim})"
            )
        covs = np.stack([linalg.ensure_symmetric(c, context=f"covariance {i}")
                         for i, c in enumerate(covs)])
        if self.priors.n_classes != self.k:
            raise DimensionError(
                f"priors have {self.priors.n_classes} entries, expected {self.k}"
            )
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)

    @classmethod
    def create(cls, k, dim, means, priors=None, covariances=None, seed=0) -> "GmmSpec":
        if covariances is None:
            covariances = np.tile(np.eye(dim), (k, 1, 1))
        if priors is None:
            priors = np.full(k, 1.0 / k)
        if not isinstance(priors, LabelMarginal):
            priors = LabelMarginal.from_array(priors)
        return cls(k, dim, means, covariances, priors, seed)

    @classmethod
    def from_json(cls, text: str) -> "GmmSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid GMM spec JSON: {exc}") from None
        for key in ("k", "dim", "seed", "priors", "means"):
            if key not in doc:
                raise DataError(f"GMM spec is missing required key {key!r}")
        return cls.create(
            k=int(doc["k"]),
            dim=int(doc["dim"]),
            means=doc["means"],
            priors=doc["priors"],
            covariances=doc.get("covariances"),
            seed=int(doc["seed"]),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "k": self.k,
                "dim": self.dim,
                "seed": self.seed,
                "priors": self.priors.probs.tolist(),
                "means": self.means.tolist(),
                "covariances": self.covariances.tolist(),
            }
        )


def sample_gmm(spec: GmmSpec, n: int) -> tuple[FeatureMatrix, LabelVector, ProbabilityMatrix]:
    """Draw n samples: class from the priors, features from that class.

    Deterministic under ``spec.seed``; returns one-hot posteriors.
    """
    if n < 1:
        raise DataError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(spec.seed)
    labels = rng.choice(spec.k, size=n, p=spec.priors.probs)
    x = np.empty((n, spec.dim), dtype=np.float64)
    for i in range(spec.k):
        rows = np.flatnonzero(labels == i)
        if rows.size == 0:
            continue
        chol = np.linalg.cholesky(
            spec.covariances[i] + 1e-12 * np.eye(spec.dim)
        )
        z = rng.standard_normal((rows.size, spec.dim))
        x[rows] = z @ chol.T + spec.means[i]
    lv = LabelVector.from_array(labels)
    return FeatureMatrix.from_array(x), lv, one_hot(lv, spec.k)


def mode_drop(
    x, labels: LabelVector, p: ProbabilityMatrix, drop_class: int
) -> tuple[FeatureMatrix, LabelVector, ProbabilityMatrix]:
    """Remove every sample of one class; K stays unchanged."""
    a = linalg._as_2d(x)
    if not 0 <= drop_class < p.n_classes:
        raise DataError(f"class {drop_class} out of range for K={p.n_classes}")
    keep = labels.labels != drop_class
    return (
        FeatureMatrix.from_array(a[keep]),
        LabelVector.from_array(labels.labels[keep]),
        ProbabilityMatrix.from_array(p.data[keep]),
    )


def mode_collapse(
    x,
    labels: LabelVector,
    p: ProbabilityMatrix,
    class_a: int,
    class_b: int,
    blend: float,
    *,
    seed: int,
) -> tuple[FeatureMatrix, LabelVector, ProbabilityMatrix]:
    """Blend two classes into a mixed mode.

    Samples of the two classes are paired uniformly at random without
    replacement (the odd leftover of the larger class stays unblended);
    each paired sample moves to the convex blend of itself and its
    partner, so pair sums and hence the overall mean are preserved.
    Posteriors of both classes become the (0.5, 0.5) soft assignment.
    """
    a = linalg._as_2d(x)
    if class_a == class_b:
        raise DataError("collapse classes must be distinct")
    if not 0.0 <= blend <= 1.0:
        raise DataError(f"blend must be in [0, 1], got {blend}")
    for c in (class_a, class_b):
        if not 0 <= c < p.n_classes:
            raise DataError(f"class {c} out of range for K={p.n_classes}")
    idx_a = np.flatnonzero(labels.labels == class_a)
    idx_b = np.flatnonzero(labels.labels == class_b)
    if idx_a.size == 0 or idx_b.size == 0:
        raise DataError("both collapse classes must have at least one member")

    rng = np.random.default_rng(seed)
    m = min(idx_a.size, idx_b.size)
    pa = rng.permutation(idx_a)[:m]
    pb = rng.permutation(idx_b)[:m]
    out = a.copy()
    out[pa] = (1.0 - blend) * a[pa] + blend * a[pb]
    out[pb] = (1.0 - blend) * a[pb] + blend * a[pa]

    probs = p.data.copy()
    both = np.concatenate([idx_a, idx_b])
    probs[both] = 0.0
    probs[both, class_a] = 0.5
    probs[both, class_b] = 0.5
    return (
        FeatureMatrix.from_array(out),
        labels,
        ProbabilityMatrix.from_array(probs),
    )
