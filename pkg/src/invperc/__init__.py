"""Multi-source invasion percolation on weighted graphs."""
from .breaking import (
    branch_decomposition,
    hull,
    path_and_cycle_break,
    relabel_hull,
    restrict_ordering,
    subpath_thirds,
    targeting_trace,
    u_sets,
)
from .errors import ConsistencyError, DisconnectedGraphError, DuplicateWeightError, InvalidArgument
from .graph import (
    CompleteGraph,
    Forest,
    RandomSource,
    WeightedGraph,
    complete_graph_uniform,
    components,
    sample_critical_window,
)
from .processes import (
    add_source_coupling,
    augmented_prim,
    er_constrained_process,
    invasion_percolation,
    kruskal_constrained,
    largest_in_component_of,
    p_critical,
    snapshot_at_p,
)
from .stats import attachment_masses, estimate_M, estimate_M_critical, max_partial_sum_deviation
from .structures import kernel, line_breaking, uniform_connected_surplus, uniform_tree

__version__ = "0.1.0"

__all__ = [
    "CompleteGraph",
    "ConsistencyError",
    "DisconnectedGraphError",
    "DuplicateWeightError",
    "Forest",
    "InvalidArgument",
    "RandomSource",
    "WeightedGraph",
    "add_source_coupling",
    "attachment_masses",
    "augmented_prim",
    "branch_decomposition",
    "complete_graph_uniform",
    "components",
    "er_constrained_process",
    "estimate_M",
    "estimate_M_critical",
    "hull",
    "invasion_percolation",
    "kernel",
    "kruskal_constrained",
    "largest_in_component_of",
    "line_breaking",
    "max_partial_sum_deviation",
    "p_critical",
    "path_and_cycle_break",
    "relabel_hull",
    "restrict_ordering",
    "sample_critical_window",
    "snapshot_at_p",
    "subpath_thirds",
    "targeting_trace",
    "u_sets",
    "uniform_connected_surplus",
    "uniform_tree",
]
