"""Triangulated Maximally Filtered Graph construction and centrality."""
from .centrality import (
    PERCENTILES,
    CentralitySeries,
    CentralityVector,
    PercentileBands,
    centrality_series,
    eigenvector_centrality,
    similarity_from_corr,
)
from .graph import TmfgGraph, ValidationReport, build_tmfg, is_perfect_elimination_order, validate

__all__ = [
    "PERCENTILES", "CentralitySeries", "CentralityVector", "PercentileBands", "TmfgGraph",
    "ValidationReport", "build_tmfg", "centrality_series", "eigenvector_centrality",
    "is_perfect_elimination_order", "similarity_from_corr", "validate",
]
