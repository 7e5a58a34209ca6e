"""Subspace clustering from kernel self-expression.

Each sample is written as a ridge-regularized linear combination of the
other samples in an implicit kernel feature space (closed form, a single
factorization for the whole dataset), the coefficients are hard-thresholded
per column, and the resulting affinity graph is clustered spectrally.
"""

from .kernels import (
    KERNEL_KINDS,
    KernelSpec,
    compute_kernel_matrix,
    default_bandwidth,
    kernel_eval,
)
from .solver import (
    CoefficientMatrix,
    DegenerateKernelError,
    Factorization,
    RegressionParams,
    factor_regularized_kernel,
    factorization_count,
    fit_ktrr,
    hard_threshold,
    solve_column,
)
from .graph import SpectralEmbedding, build_affinity, normalized_laplacian, spectral_embedding
from .kmeans import KMeansParams, Labeling, kmeans
from .metrics import accuracy, ari, contingency_table, fscore, nmi
from .corruption import CorruptionSpec, add_gaussian_snr, add_salt_pepper, apply_corruption
from .dataio import (
    Dataset,
    first_k_classes,
    load_csv,
    load_idx,
    save_csv,
    subsample_per_class,
)
from .config import ExperimentConfig
from .experiment import (
    PipelineError,
    RunReport,
    cluster_pipeline,
    emit_report,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_KINDS",
    "KernelSpec",
    "compute_kernel_matrix",
    "default_bandwidth",
    "kernel_eval",
    "CoefficientMatrix",
    "DegenerateKernelError",
    "Factorization",
    "RegressionParams",
    "factor_regularized_kernel",
    "factorization_count",
    "fit_ktrr",
    "hard_threshold",
    "solve_column",
    "SpectralEmbedding",
    "build_affinity",
    "normalized_laplacian",
    "spectral_embedding",
    "KMeansParams",
    "Labeling",
    "kmeans",
    "accuracy",
    "ari",
    "contingency_table",
    "fscore",
    "nmi",
    "CorruptionSpec",
    "add_gaussian_snr",
    "add_salt_pepper",
    "apply_corruption",
    "Dataset",
    "first_k_classes",
    "load_csv",
    "load_idx",
    "save_csv",
    "subsample_per_class",
    "ExperimentConfig",
    "PipelineError",
    "RunReport",
    "cluster_pipeline",
    "emit_report",
    "run_experiment",
    "__version__",
]
