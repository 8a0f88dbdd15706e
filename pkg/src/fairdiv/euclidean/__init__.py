"""Solvers that exploit low-dimensional or Euclidean structure."""

from .coreset import CoresetBundle, GmmOrdering, build_coreset, coreset_bound, coreset_size, gmm, maximal_prefix
from .dp import BudgetError, cluster_profiles, fair_dp
from .grid import SearchFailedError, fair_euclidean, fair_euclidean_search
from .line import fair_line, fair_line_opt

__all__ = [
    "BudgetError",
    "CoresetBundle",
    "GmmOrdering",
    "SearchFailedError",
    "build_coreset",
    "cluster_profiles",
    "coreset_bound",
    "coreset_size",
    "fair_dp",
    "fair_euclidean",
    "fair_euclidean_search",
    "fair_line",
    "fair_line_opt",
    "gmm",
    "maximal_prefix",
]
