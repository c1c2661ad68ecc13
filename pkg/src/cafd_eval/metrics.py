"""Evaluation scores for generated feature sets.

Frechet distance between fitted Gaussians (FID), posterior-weighted
class-conditional statistics and their per-class Frechet average (CAFD),
Gaussian-mixture moment recombination, Inception Score, Mode Score, the
label-marginal KL term that catches mode dropping, and the composite
report that bundles all of them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DataError, DimensionError, NumericalError
from .tensor_io import (
    FeatureMatrix,
    LabelMarginal,
    LabelVector,
    ProbabilityMatrix,
    validate_pair,
)

# Smoothing added to every probability (then renormalized) before any KL
# term, so zero class mass stays finite.
KL_EPS = 1e-10

# Round-off band for distance results: values in [-NEGATIVE_CLAMP, 0) are
# clamped to zero, anything more negative is a numerical failure.
NEGATIVE_CLAMP = 1e-8

THREADS_ENV_VAR = "CAFD_EVAL_THREADS"


def mass_floor(n_samples: int) -> float:
    """Minimum total posterior mass for a class to count as populated."""
    return max(2.0, 1e-3 * n_samples)


def gmm_parameter_count(k: int, n: int) -> int:
    """Free parameters of a K-component Gaussian mixture in n dimensions."""
    return k * ((n * n + n) // 2 + n + 1)


def gaussian_parameter_count(n: int) -> int:
    """Free parameters of a single Gaussian in n dimensions."""
    return (n * n + n) // 2 + n


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GaussianStats:
    """First and second moments of a feature set: mean vector + covariance."""

    mu: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=np.float64))
        object.__setattr__(self, "c", linalg.ensure_symmetric(self.c, context="covariance"))

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class ClassWeights:
    """Column-normalized posteriors w_ij = p(y_i|x_j) / sum_j' p(y_i|x_j').

    ``w`` is K x N; rows of classes whose total posterior mass falls under
    the mass floor are zeroed, and those classes are listed in ``skipped``.
    """

    w: np.ndarray
    skipped: tuple[int, ...]
    effective_mass: np.ndarray


@dataclass(frozen=True)
class MixtureStats:
    """Gaussian mixture fitted from posteriors: priors plus per-class stats.

    Components of skipped (under-massed) classes carry zero statistics.
    """

    priors: LabelMarginal
    components: tuple[GaussianStats, ...]
    effective_mass: np.ndarray
    skipped: tuple[int, ...] = ()

    @property
    def n_classes(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class CafdResult:
    """Class-aware Frechet distance with its per-class breakdown.

    ``per_class`` holds one value per class id, NaN for skipped classes;
    ``value`` is the uniform average over the surviving classes.
    """

    value: float
    per_class: np.ndarray
    skipped: tuple[int, ...]


def gaussian_stats(x, weights=None) -> GaussianStats:
    """Fit mean and population covariance to a feature set."""
    a = linalg._as_2d(x)
    if a.shape[0] == 0:
        raise DataError("cannot fit Gaussian statistics to an empty sample set")
    mu = linalg.mean_vector(a, weights)
    return GaussianStats(mu, linalg.covariance(a, weights, mean=mu))


def _regularized(c: np.ndarray, epsilon_reg: float) -> np.ndarray:
    if epsilon_reg < 0:
        raise DataError(f"epsilon_reg must be nonnegative, got {epsilon_reg}")
    if epsilon_reg == 0.0:
        return c
    return c + epsilon_reg * np.eye(c.shape[0])


def frechet_distance(a: GaussianStats, b: GaussianStats, epsilon_reg: float = 0.0) -> float:
    """Squared Frechet (Wasserstein-2) distance between two Gaussians.

    ||mu_a - mu_b||^2 + Tr(C_a) + Tr(C_b) - 2 Tr((C_a C_b)^1/2).
    The mean term uses the squared Euclidean norm: that is the form
    consistent with the trace term's units and the metric's definition.
    ``epsilon_reg`` adds a diagonal ridge to both covariances before the
    trace term, for singular covariances from tiny classes.
    """
    if a.mu.shape != b.mu.shape:
        raise DimensionError(f"mean shapes differ: {a.mu.shape} vs {b.mu.shape}")
    ca = _regularized(a.c, epsilon_reg)
    cb = _regularized(b.c, epsilon_reg)
    diff = a.mu - b.mu
    val = float(diff @ diff) + float(np.trace(ca)) + float(np.trace(cb))
    val -= 2.0 * linalg.trace_sqrt_product(ca, cb)
    if val < 0.0:
        if val < -NEGATIVE_CLAMP:
            raise NumericalError(f"Frechet distance evaluated to {val!r} < -{NEGATIVE_CLAMP}")
        val = 0.0
    return val


def fid(real, gen, epsilon_reg: float = 0.0) -> float:
    """Frechet distance between Gaussians fitted to two feature sets."""
    a = linalg._as_2d(real)
    b = linalg._as_2d(gen)
    if a.shape[1] != b.shape[1]:
        raise DimensionError(
            f"feature dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    return frechet_distance(gaussian_stats(a), gaussian_stats(b), epsilon_reg)


def class_weights(p: ProbabilityMatrix) -> ClassWeights:
    """Per-class sample weights from posteriors (column normalization).

    Classes whose total posterior mass is below the mass floor are
    degenerate: their weight rows are zeroed and reported, not fatal.
    """
    mass = p.data.sum(axis=0)
    floor = mass_floor(p.n_samples)
    skipped = tuple(int(i) for i in np.flatnonzero(mass < floor))
    w = np.zeros((p.n_classes, p.n_samples), dtype=np.float64)
    alive = mass >= floor
    if alive.any():
        w[alive] = p.data.T[alive] / mass[alive, None]
    return ClassWeights(w, skipped, mass)


def class_conditional_stats(x, p: ProbabilityMatrix) -> MixtureStats:
    """Posterior-weighted per-class Gaussian statistics.

    mu_i = sum_j w_ij x_j and C_i = sum_j w_ij (x_j - mu_i)(x_j - mu_i)^T,
    with priors p_i = (1/N) sum_j p(y_i|x_j). With one-hot posteriors this
    reduces exactly to per-class subset statistics.
    """
    a = linalg._as_2d(x)
    if a.shape[0] != p.n_samples:
        raise DimensionError(
            f"{a.shape[0]} feature rows vs {p.n_samples} posterior rows"
        )
    cw = class_weights(p)
    dim = a.shape[1]
    zero_stats = GaussianStats(np.zeros(dim), np.zeros((dim, dim)))
    components = []
    for i in range(p.n_classes):
        if i in cw.skipped:
            components.append(zero_stats)
            continue
        w_i = cw.w[i]
        mu_i = w_i @ a
        components.append(GaussianStats(mu_i, linalg.covariance(a, w_i, mean=mu_i)))
    priors = LabelMarginal.from_array(cw.effective_mass / p.n_samples)
    return MixtureStats(priors, tuple(components), cw.effective_mass, cw.skipped)


def mixture_moments(m: MixtureStats) -> GaussianStats:
    """Recombine mixture components into overall first and second moments.

    mu = sum_i p_i mu_i and C = sum_i p_i C_i
    + sum_i p_i (mu_i - mu)(mu_i - mu)^T (law of total variance).
    Exact when no component was skipped.
    """
    p = m.priors.probs
    mus = np.stack([g.mu for g in m.components])
    mu = p @ mus
    c = np.zeros((mu.shape[0], mu.shape[0]), dtype=np.float64)
    for p_i, g in zip(p, m.components):
        d = g.mu - mu
        c += p_i * g.c + p_i * np.outer(d, d)
    return GaussianStats(mu, (c + c.T) / 2.0)


def _per_class_frechet(
    real_m: MixtureStats,
    gen_m: MixtureStats,
    epsilon_reg: float,
) -> CafdResult:
    k = real_m.n_classes
    skipped = tuple(sorted(set(real_m.skipped) | set(gen_m.skipped)))
    alive = [i for i in range(k) if i not in skipped]
    if not alive:
        raise DataError("all classes are degenerate on at least one side")
    per_class = np.full(k, np.nan)

    def one(i: int) -> float:
        return frechet_distance(real_m.components[i], gen_m.components[i], epsilon_reg)

    threads = _thread_count()
    if threads > 1 and len(alive) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, alive))
    else:
        values = [one(i) for i in alive]
    for i, v in zip(alive, values):
        per_class[i] = v
    # Fixed reduction order so threaded runs are bit-identical to sequential.
    total = 0.0
    for i in alive:
        total += per_class[i]
    return CafdResult(total / len(alive), per_class, skipped)


def cafd(
    real_x,
    real_p: ProbabilityMatrix,
    gen_x,
    gen_p: ProbabilityMatrix,
    epsilon_reg: float = 0.0,
) -> CafdResult:
    """Class-aware Frechet distance.

    Frechet distance between real and generated class-conditional Gaussians,
    averaged uniformly over the classes populated on both sides. Classes
    under the mass floor on either side are skipped and reported.
    """
    rx = real_x if isinstance(real_x, FeatureMatrix) else FeatureMatrix.from_array(real_x)
    gx = gen_x if isinstance(gen_x, FeatureMatrix) else FeatureMatrix.from_array(gen_x)
    validate_pair(rx, gx, real_p, gen_p)
    real_m = class_conditional_stats(rx, real_p)
    gen_m = class_conditional_stats(gx, gen_p)
    return _per_class_frechet(real_m, gen_m, epsilon_reg)


def _smoothed(p: np.ndarray) -> np.ndarray:
    q = p + KL_EPS
    return q / q.sum(axis=-1, keepdims=True)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    ps = _smoothed(np.asarray(p, dtype=np.float64))
    qs = _smoothed(np.asarray(q, dtype=np.float64))
    return float(np.sum(ps * (np.log(ps) - np.log(qs))))


def label_kld(p_star: LabelMarginal, p_gen: LabelMarginal) -> float:
    """KL(p* || p) between real and generated label marginals (smoothed)."""
    if p_star.n_classes != p_gen.n_classes:
        raise DimensionError(
            f"class count mismatch: {p_star.n_classes} vs {p_gen.n_classes}"
        )
    return _kl(p_star.probs, p_gen.probs)


def inception_score(p: ProbabilityMatrix) -> float:
    """exp(E_x[KL(p(y|x) || p(y))]) with p(y) the column mean of ``p``."""
    rows = _smoothed(p.data)
    marg = _smoothed(p.data.mean(axis=0))
    kl_rows = np.sum(rows * (np.log(rows) - np.log(marg)), axis=1)
    return float(np.exp(kl_rows.mean()))


def mode_score(p_gen: ProbabilityMatrix, p_star: LabelMarginal) -> float:
    """exp(E_x[KL(p(y|x) || p(y*))] - KL(p(y*) || p(y))).

    p(y) is the column mean of the generated posteriors.
    """
    if p_gen.n_classes != p_star.n_classes:
        raise DimensionError(
            f"class count mismatch: {p_gen.n_classes} vs {p_star.n_classes}"
        )
    rows = _smoothed(p_gen.data)
    star = _smoothed(p_star.probs)
    term1 = float(np.sum(rows * (np.log(rows) - np.log(star)), axis=1).mean())
    term2 = _kl(p_star.probs, p_gen.data.mean(axis=0))
    return float(np.exp(term1 - term2))


@dataclass(frozen=True)
class EvalConfig:
    """Settings for the composite evaluation."""

    splits: int = 1
    seed: int | None = None
    epsilon_reg: float = 0.0

    def __post_init__(self):
        if self.splits < 1:
            raise DataError(f"splits must be >= 1, got {self.splits}")
        if self.splits > 1 and self.seed is None:
            raise DataError("a seed is required when splits > 1")
        if self.epsilon_reg < 0:
            raise DataError(f"epsilon_reg must be nonnegative, got {self.epsilon_reg}")


@dataclass(frozen=True)
class MetricReport:
    """All scores of one evaluation run.

    ``per_class_frechet`` holds NaN for skipped classes. ``split_mean_std``
    is present when the run repeated over disjoint subsets: per field a
    ``{"mean": ..., "std": ...}`` pair (sample std, ddof=1), and for
    ``per_class_frechet`` one such pair per class (None where the class
    was skipped in every split).
    """

    fid: float
    cafd: float
    per_class_frechet: np.ndarray
    kld: float
    inception_score: float
    mode_score: float
    skipped_classes: tuple[int, ...]
    split_mean_std: dict | None = None
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float) and math.isnan(v):
                return None
            return v

        doc = {
            "fid": self.fid,
            "cafd": self.cafd,
            "per_class_frechet": [clean(float(v)) for v in self.per_class_frechet],
            "kld": self.kld,
            "inception_score": self.inception_score,
            "mode_score": self.mode_score,
            "skipped_classes": list(self.skipped_classes),
        }
        if self.split_mean_std is not None:
            doc["split_mean_std"] = self.split_mean_std
        doc["metadata"] = dict(self.metadata)
        return doc


def _marginal_from_labels(labels: LabelVector, k: int) -> LabelMarginal:
    counts = np.bincount(labels.labels, minlength=k)
    if counts.shape[0] > k:
        raise DataError(f"label {int(labels.labels.max())} out of range for K={k}")
    return LabelMarginal.from_array(counts / counts.sum())


def _scores_once(
    real_x: np.ndarray,
    real_p: ProbabilityMatrix,
    gen_x: np.ndarray,
    gen_p: ProbabilityMatrix,
    epsilon_reg: float,
    real_labels: LabelVector | None,
) -> tuple[float, CafdResult, float, float, float]:
    k = real_p.n_classes
    p_star = (
        _marginal_from_labels(real_labels, k) if real_labels is not None else real_p.marginal()
    )
    fid_v = fid(real_x, gen_x, epsilon_reg)
    cafd_v = _per_class_frechet(
        class_conditional_stats(real_x, real_p),
        class_conditional_stats(gen_x, gen_p),
        epsilon_reg,
    )
    kld_v = label_kld(p_star, gen_p.marginal())
    is_v = inception_score(gen_p)
    ms_v = mode_score(gen_p, p_star)
    return fid_v, cafd_v, kld_v, is_v, ms_v


def _mean_std(values: np.ndarray) -> dict:
    valid = values[~np.isnan(values)]
    if valid.size == 0:
        return None
    mean = float(valid.mean())
    std = float(valid.std(ddof=1)) if valid.size > 1 else None
    return {"mean": mean, "std": std}


def evaluate(
    real_x,
    real_p: ProbabilityMatrix,
    gen_x,
    gen_p: ProbabilityMatrix,
    config: EvalConfig | None = None,
    real_labels: LabelVector | None = None,
) -> MetricReport:
    """Run the full evaluation framework and assemble a MetricReport.

    The real-side label marginal p(y*) comes from ground-truth labels when
    supplied, else from the real posterior column means. With
    ``config.splits = k > 1`` the scores are recomputed on k disjoint
    seeded subsets of both sides and reported as mean +/- sample std.
    """
    cfg = config or EvalConfig()
    rx = real_x if isinstance(real_x, FeatureMatrix) else FeatureMatrix.from_array(real_x)
    gx = gen_x if isinstance(gen_x, FeatureMatrix) else FeatureMatrix.from_array(gen_x)
    validate_pair(rx, gx, real_p, gen_p)
    if real_labels is not None and real_labels.n_samples != rx.n_samples:
        raise DimensionError(
            f"{rx.n_samples} real feature rows vs {real_labels.n_samples} labels"
        )

    fid_v, cafd_v, kld_v, is_v, ms_v = _scores_once(
        rx.data, real_p, gx.data, gen_p, cfg.epsilon_reg, real_labels
    )

    split_doc = None
    if cfg.splits > 1:
        rng = np.random.default_rng(cfg.seed)
        parts_real = np.array_split(rng.permutation(rx.n_samples), cfg.splits)
        parts_gen = np.array_split(rng.permutation(gx.n_samples), cfg.splits)
        k = real_p.n_classes
        fids, klds, iss, mss = [], [], [], []
        per_class = np.full((cfg.splits, k), np.nan)
        cafds = []
        for s, (ir, ig) in enumerate(zip(parts_real, parts_gen)):
            sub_labels = (
                LabelVector.from_array(real_labels.labels[ir])
                if real_labels is not None
                else None
            )
            f, c, d, i, m = _scores_once(
                rx.data[ir],
                ProbabilityMatrix.from_array(real_p.data[ir]),
                gx.data[ig],
                ProbabilityMatrix.from_array(gen_p.data[ig]),
                cfg.epsilon_reg,
                sub_labels,
            )
            fids.append(f)
            cafds.append(c.value)
            per_class[s] = c.per_class
            klds.append(d)
            iss.append(i)
            mss.append(m)
        split_doc = {
            "splits": cfg.splits,
            "seed": cfg.seed,
            "fid": _mean_std(np.asarray(fids)),
            "cafd": _mean_std(np.asarray(cafds)),
            "kld": _mean_std(np.asarray(klds)),
            "inception_score": _mean_std(np.asarray(iss)),
            "mode_score": _mean_std(np.asarray(mss)),
            "per_class_frechet": [_mean_std(per_class[:, i]) for i in range(k)],
        }

    metadata = {
        "n_real": rx.n_samples,
        "n_gen": gx.n_samples,
        "feature_dim": rx.dim,
        "n_classes": real_p.n_classes,
        "gmm_parameter_count": gmm_parameter_count(real_p.n_classes, rx.dim),
        "gaussian_parameter_count": gaussian_parameter_count(rx.dim),
    }
    return MetricReport(
        fid=fid_v,
        cafd=cafd_v.value,
        per_class_frechet=cafd_v.per_class,
        kld=kld_v,
        inception_score=is_v,
        mode_score=ms_v,
        skipped_classes=cafd_v.skipped,
        split_mean_std=split_doc,
        metadata=metadata,
    )
