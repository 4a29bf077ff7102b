"""Spectral analysis of the normalized adjacency and the bounds built on it."""

from .decomposition import (
    ROUND_BOUND_CAP,
    AlignmentReport,
    DecompositionReport,
    DegreeDeviation,
    alignment_report,
    decomposition_report,
    degree_deviation_stats,
    round_bound,
    second_eigenvector,
)
from .eigen import (
    DENSE_CAP,
    LambdaStats,
    SpectrumReport,
    eigensolve,
    eigensolve_dense,
    eigensolve_topm,
    lambda_stats,
)
from .norms import normalized_laplacian_diff, operator_norm, spectral_norm_diff

__all__ = [
    "ROUND_BOUND_CAP",
    "AlignmentReport",
    "DecompositionReport",
    "DegreeDeviation",
    "alignment_report",
    "decomposition_report",
    "degree_deviation_stats",
    "round_bound",
    "second_eigenvector",
    "DENSE_CAP",
    "LambdaStats",
    "SpectrumReport",
    "eigensolve",
    "eigensolve_dense",
    "eigensolve_topm",
    "lambda_stats",
    "normalized_laplacian_diff",
    "operator_norm",
    "spectral_norm_diff",
]
