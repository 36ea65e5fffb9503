"""Spectral ranking and reduced Google matrix analysis of directed networks."""

__version__ = "0.1.0"

from .graph import DirectedGraph, NodeSubset, load_edge_list, resolve_subset  # noqa: E402
from .google import GoogleOperator, RankVector, cheirank, overlap_curve, pagerank, two_d_rank  # noqa: E402
from .reduced import ReducedGoogleMatrix, compute_components, compute_grr, leading_pair, qrnd, reduced_pagerank  # noqa: E402
from .sensitivity import diagonal_sensitivity, perturb_column, sensitivity_table  # noqa: E402
from .editions import EditionRankTable, average_reduced, pagerank_of_average, theta_scores  # noqa: E402
from .friendship import build_network, effective_matrix, export_network  # noqa: E402

__all__ = [
    "DirectedGraph", "NodeSubset", "load_edge_list", "resolve_subset",
    "GoogleOperator", "RankVector", "cheirank", "overlap_curve", "pagerank", "two_d_rank",
    "ReducedGoogleMatrix", "compute_components", "compute_grr", "leading_pair", "qrnd", "reduced_pagerank",
    "diagonal_sensitivity", "perturb_column", "sensitivity_table",
    "EditionRankTable", "average_reduced", "pagerank_of_average", "theta_scores",
    "build_network", "effective_matrix", "export_network",
]
