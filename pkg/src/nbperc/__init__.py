"""Algebraic bounds and Monte Carlo tools for heterogeneous site percolation
on finite directed and undirected graphs.

The package builds the site-weighted adjacency, line-graph, and
non-backtracking matrices of a digraph, evaluates spectral and norm bounds on
cluster susceptibility and connectivity, and validates them against exact
enumeration and Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .graph import (
    Digraph,
    EdgeListError,
    OlgReport,
    SiteProbabilities,
    as_probabilities,
    directed_distance,
    distances_from,
    hashimoto_structure,
    is_strongly_connected,
    olg_connectivity_report,
    olg_return_lengths,
    read_edge_list,
    strongly_connected_components,
    weighted_adjacency,
    weighted_hashimoto,
    weighted_line_adjacency,
    write_edge_list,
)
from .spectral import (
    CostBudgetError,
    PerronResult,
    SpectralConvergenceError,
    WalkProfile,
    height_ratio,
    induced_norm,
    spectral_radius,
    walk_profile,
)
from .generators import (
    GeneratorSpec,
    build,
    complete,
    cycle,
    families,
    random_regular,
    rooted_tree,
    torus,
    tree_closed,
    two_region,
)
from .montecarlo import (
    EstimateResult,
    FitResult,
    RealizationStats,
    SizeFit,
    SweepResult,
    cluster_stats,
    count_sacs,
    estimate_observables,
    fit_threshold,
    realization_stats,
    sample_open,
    sweep,
)
from .oracle import (
    ENUMERATION_CAP,
    ExactObservables,
    exact_chi_identity_check,
    exact_observables,
)
from .bounds import (
    BoundRecord,
    BoundReport,
    ReturnProbability,
    SpectralCache,
    UniquenessReport,
    bound_chi_norm1,
    bound_chi_out_adjacency,
    bound_chi_out_hashimoto,
    bound_chi_qnorm,
    bound_connectivity,
    bound_sac,
    default_pairs,
    evaluate_bounds,
    minimal_return_probability,
    uniqueness_report,
)
from .corpus import CorpusItem, corpus

__all__ = [
    "__version__",
    "Digraph",
    "EdgeListError",
    "OlgReport",
    "SiteProbabilities",
    "as_probabilities",
    "directed_distance",
    "distances_from",
    "hashimoto_structure",
    "is_strongly_connected",
    "olg_connectivity_report",
    "olg_return_lengths",
    "read_edge_list",
    "strongly_connected_components",
    "weighted_adjacency",
    "weighted_hashimoto",
    "weighted_line_adjacency",
    "write_edge_list",
    "CostBudgetError",
    "PerronResult",
    "SpectralConvergenceError",
    "WalkProfile",
    "height_ratio",
    "induced_norm",
    "spectral_radius",
    "walk_profile",
    "GeneratorSpec",
    "build",
    "complete",
    "cycle",
    "families",
    "random_regular",
    "rooted_tree",
    "torus",
    "tree_closed",
    "two_region",
    "EstimateResult",
    "FitResult",
    "RealizationStats",
    "SizeFit",
    "SweepResult",
    "cluster_stats",
    "count_sacs",
    "estimate_observables",
    "fit_threshold",
    "realization_stats",
    "sample_open",
    "sweep",
    "ENUMERATION_CAP",
    "ExactObservables",
    "exact_chi_identity_check",
    "exact_observables",
    "BoundRecord",
    "BoundReport",
    "ReturnProbability",
    "SpectralCache",
    "UniquenessReport",
    "bound_chi_norm1",
    "bound_chi_out_adjacency",
    "bound_chi_out_hashimoto",
    "bound_chi_qnorm",
    "bound_connectivity",
    "bound_sac",
    "default_pairs",
    "evaluate_bounds",
    "minimal_return_probability",
    "uniqueness_report",
    "CorpusItem",
    "corpus",
]
