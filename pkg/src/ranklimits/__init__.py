"""Simulation and bound toolkit for exact recovery in noisy pairwise ranking."""

from .model import (GapStats, LinkFunction, Permutation, ProbMatrix, apply_permutation,
                    build_sst_matrix, disagreement, gap_stats)
from .sampler import DesignParams, ObservationBatch, counts, ensemble, sample_batch

__version__ = "0.1.0"

__all__ = [
    "GapStats", "LinkFunction", "Permutation", "ProbMatrix", "apply_permutation",
    "build_sst_matrix", "disagreement", "gap_stats", "DesignParams", "ObservationBatch",
    "counts", "ensemble", "sample_batch",
]
