"""Evaluation toolkit for generative-model feature sets.

Scores feature sets produced by domain-specific encoders: Frechet distance
between fitted Gaussians (FID), a class-aware variant built on posterior-
weighted Gaussian-mixture statistics (CAFD) with a label-marginal KL term,
Inception and Mode scores, normality diagnostics, and feature-space
perturbations that stress-test the metrics.
"""

from .errors import (
    DataError,
    DimensionError,
    EvaluationError,
    FormatError,
    NumericalError,
    TruncationError,
)
from .linalg import (
    EigenDecomposition,
    PcaModel,
    covariance,
    mean_vector,
    pca,
    sqrtm_psd,
    sym_eig,
    trace_sqrt_product,
)
from .metrics import (
    CafdResult,
    ClassWeights,
    EvalConfig,
    GaussianStats,
    MetricReport,
    MixtureStats,
    cafd,
    class_conditional_stats,
    class_weights,
    evaluate,
    fid,
    frechet_distance,
    gaussian_parameter_count,
    gaussian_stats,
    gmm_parameter_count,
    inception_score,
    label_kld,
    mixture_moments,
    mode_score,
)
from .normality import (
    AdTestResult,
    MardiaResult,
    ad_test,
    ad_test_pca,
    mardia_test,
    split_random,
)
from .perturb import HackRecipe, PreservationReport, axis_permutation_hack, mean_cov_preservation_check
from .synth import GmmSpec, mode_collapse, mode_drop, sample_gmm
from .tensor_io import (
    FeatureMatrix,
    LabelMarginal,
    LabelVector,
    ProbabilityMatrix,
    one_hot,
    read_feature_matrix,
    read_labels,
    read_probabilities,
    validate_pair,
    write_feature_matrix,
    write_labels,
    write_probabilities,
)

__version__ = "0.1.0"
