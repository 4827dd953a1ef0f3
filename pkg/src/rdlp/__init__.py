"""Cluster daily residential electricity load profiles into representative
daily load profiles (RDLPs) and pick the best cluster set by combining
validity indices with a weighted qualitative scoring matrix."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .cluster import compute_rdlp, kmeans, som, som_kmeans
from .config import ExperimentConfig, load_config
from .errors import ConfigError, DataError, MetricError, ParameterError
from .preprocess import (
    BinAssignment,
    NormalisationMethod,
    amc,
    filter_zeros,
    normalise,
    normalise_set,
    prebin_amc,
    prebin_integral_kmeans,
)
from .profiles import (
    DailyLoadProfile,
    ProfileSet,
    load_csv,
    peak_demand,
    total_demand,
    write_csv,
)
from .qual import (
    ClusterQualScores,
    SetQualScores,
    aggregate_set_scores,
    cluster_entropy,
    consumption_errors,
    demand_percentile_features,
    detect_peaks,
    mpc_ratio,
    usability_scores,
)
from .quant import combined_index, dbi, ix_score, mia, silhouette
from .runner import RunRecord, emit_plots, run_grid, select_and_rank
from .scoring import Measure, RunScore, ScoringMatrix, default_matrix, score_runs
from .synthetic import Archetype, SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "Archetype",
    "BinAssignment",
    "ClusterQualScores",
    "ConfigError",
    "DailyLoadProfile",
    "DataError",
    "ExperimentConfig",
    "KERNEL_BACKEND",
    "Measure",
    "MetricError",
    "NormalisationMethod",
    "ParameterError",
    "ProfileSet",
    "RunRecord",
    "RunScore",
    "ScoringMatrix",
    "SetQualScores",
    "SyntheticSpec",
    "aggregate_set_scores",
    "amc",
    "cluster_entropy",
    "combined_index",
    "compute_rdlp",
    "consumption_errors",
    "dbi",
    "default_matrix",
    "demand_percentile_features",
    "detect_peaks",
    "emit_plots",
    "filter_zeros",
    "generate_synthetic",
    "ix_score",
    "kmeans",
    "load_config",
    "load_csv",
    "mia",
    "mpc_ratio",
    "normalise",
    "normalise_set",
    "peak_demand",
    "prebin_amc",
    "prebin_integral_kmeans",
    "run_grid",
    "score_runs",
    "select_and_rank",
    "silhouette",
    "som",
    "som_kmeans",
    "total_demand",
    "usability_scores",
    "write_csv",
]
