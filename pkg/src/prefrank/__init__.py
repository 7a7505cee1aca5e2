"""Ranking nodes of a graph from a sample of pairwise preferences."""

from .baselines import graph_rank, rank_centrality
from .graph import (
    Graph,
    GraphError,
    PairIndex,
    gen_complete,
    gen_erdos_renyi,
    gen_regular,
    gen_two_cluster,
    gen_union_cliques,
    graph_from_features,
    read_edge_list,
    write_edge_list,
)
from .kernels import NodeKernel, PairKernel, PairMode, laplacian_kernel, ls_kernel, validate_membership
from .ranking import (
    PreferenceSample,
    PreferenceVector,
    PrefRankResult,
    Ranking,
    Task,
    kendall_tau,
    pairwise_error,
    pref_rank,
    sample_pairs,
    spearman_footrule,
    win_counts,
)
from .svm import SvmProblem, SvmSolution, solve_dual

__all__ = [
    "Graph",
    "GraphError",
    "NodeKernel",
    "PairIndex",
    "PairKernel",
    "PairMode",
    "PrefRankResult",
    "PreferenceSample",
    "PreferenceVector",
    "Ranking",
    "SvmProblem",
    "SvmSolution",
    "Task",
    "gen_complete",
    "gen_erdos_renyi",
    "gen_regular",
    "gen_two_cluster",
    "gen_union_cliques",
    "graph_from_features",
    "graph_rank",
    "kendall_tau",
    "laplacian_kernel",
    "ls_kernel",
    "pairwise_error",
    "pref_rank",
    "rank_centrality",
    "read_edge_list",
    "sample_pairs",
    "solve_dual",
    "spearman_footrule",
    "validate_membership",
    "win_counts",
    "write_edge_list",
]

__version__ = "0.1.0"
