"""homoscope: homophily metrics, CSBM-H node distinguishability and
classifier-based performance metrics for node classification graphs."""

from ._backend import BACKEND
from .graph import (
    AggregationKind,
    Graph,
    aggregate_high_pass,
    aggregate_low_pass,
    load_features,
    load_graph,
)
from .homophily import (
    HomophilyReport,
    compute_report,
    h_adj,
    h_agg,
    h_class,
    h_edge,
    h_ge,
    h_node,
    label_informativeness,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AggregationKind",
    "Graph",
    "HomophilyReport",
    "aggregate_high_pass",
    "aggregate_low_pass",
    "compute_report",
    "h_adj",
    "h_agg",
    "h_class",
    "h_edge",
    "h_ge",
    "h_node",
    "label_informativeness",
    "load_features",
    "load_graph",
]
