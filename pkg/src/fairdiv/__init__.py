"""Fair max-min diversification."""

from .core import (
    Dataset,
    FairDivError,
    FairnessSpec,
    InfeasibleError,
    MetricError,
    Solution,
    check_feasible,
    diversity,
    validate,
)
from .distributed import two_round_solve
from .euclidean import build_coreset, fair_euclidean_search, fair_line_opt
from .greedy_flow import fair_greedy_flow, fair_greedy_flow_search
from .io import load_dataset
from .lp_rounding import lp_pipeline
from .oracle import brute_force_opt, verify
from .streaming import fair_stream_euclidean, fair_stream_gen, fair_stream_two_groups
from .synthetic import generate_synthetic

__all__ = [
    "Dataset",
    "FairDivError",
    "FairnessSpec",
    "InfeasibleError",
    "MetricError",
    "Solution",
    "brute_force_opt",
    "build_coreset",
    "check_feasible",
    "diversity",
    "fair_euclidean_search",
    "fair_greedy_flow",
    "fair_greedy_flow_search",
    "fair_line_opt",
    "fair_stream_euclidean",
    "fair_stream_gen",
    "fair_stream_two_groups",
    "generate_synthetic",
    "load_dataset",
    "lp_pipeline",
    "two_round_solve",
    "validate",
    "verify",
]
