"""Label/structure homophily metrics computed from the CSR graph directly.

No ``N x N`` matrix is ever formed: aggregation homophily works on the
``N x C`` aggregated label matrix and per-class column sums.

Edge-based quantities count an undirected edge once.  Degree-weighted class
shares (``p_bar``) and the label-pair distribution use the directed
incidence count (``2|E|`` for undirected graphs without self-loops) as
normaliser.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import kernels
from .errors import UndefinedMetricError
from .graph import RANDOM_WALK, AggregationKind, Graph, aggregate_low_pass, as_feature_matrix

__all__ = [
    "METRIC_KEYS",
    "HomophilyReport",
    "compute_report",
    "h_adj",
    "h_agg",
    "h_class",
    "h_edge",
    "h_ge",
    "h_node",
    "label_informativeness",
]

METRIC_KEYS = ("h_edge", "h_node", "h_class", "h_agg", "h_ge", "h_adj", "li")

# relative slack for the >= comparison in h_agg; absorbs summation-order noise
AGG_TIE_RTOL = 1e-12


def _require_edges(g, metric):
    if g.n_incidences == 0:
        raise UndefinedMetricError(metric, "graph has no edges")


def _loop_mask(g):
    rows = np.repeat(np.arange(g.n_nodes), g.degrees)
    return rows == g.indices


def h_edge(g: Graph) -> float:
    """Fraction of edges joining two nodes with the same label."""
    _require_edges(g, "h_edge")
    same = int(kernels.same_label_counts(g.indptr, g.indices, g.labels).sum())
    total = g.n_incidences
    if not g.directed:
        # double-count self-loops so every edge appears exactly twice
        loops = g.n_self_loops
        same += loops
        total += loops
    return same / total


def h_node(g: Graph) -> tuple[float, np.ndarray]:
    """Mean local homophily and the per-node vector.

    Zero-degree nodes have undefined local homophily; they get ``nan`` in
    the vector and are left out of the mean.
    """
    deg = g.degrees
    same = kernels.same_label_counts(g.indptr, g.indices, g.labels)
    per_node = np.full(g.n_nodes, np.nan)
    has = deg > 0
    if not has.any():
        raise UndefinedMetricError("h_node", "every node has degree zero")
    per_node[has] = same[has] / deg[has]
    return float(np.mean(per_node[has])), per_node


def h_class(g: Graph) -> float:
    """Class-insensitive homophily: clipped excess of class-wise homophily
    over the class share, averaged over ``C - 1``.

    A class whose nodes have zero total degree contributes 0.
    """
    C = g.n_classes
    if C < 2:
        raise UndefinedMetricError("h_class", "needs at least two classes")
    same = kernels.same_label_counts(g.indptr, g.indices, g.labels)
    same_k = np.bincount(g.labels, weights=same, minlength=C)
    deg_k = np.bincount(g.labels, weights=g.degrees, minlength=C)
    share = g.class_sizes() / g.n_nodes
    total = 0.0
    for k in range(C):
        if deg_k[k] > 0:
            total += max(0.0, same_k[k] / deg_k[k] - share[k])
    return total / (C - 1)


def h_ge(g: Graph, x) -> float:
    """Mean cosine similarity of feature rows across edges; a zero row
    contributes cosine 0."""
    _require_edges(g, "h_ge")
    x = as_feature_matrix(x, g.n_nodes)
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    total = kernels.edge_cosine_sum(g.indptr, g.indices, x, norms)
    count = g.n_incidences
    if not g.directed:
        loops = _loop_mask(g)
        if loops.any():
            loop_nodes = g.indices[loops]
            total += float(np.count_nonzero(norms[loop_nodes] > 0))
            count += int(loops.sum())
    return total / count


def h_agg(g: Graph, kind: AggregationKind = RANDOM_WALK, include_self: bool = True) -> float:
    """Share of nodes whose mean post-aggregation similarity to same-label
    nodes is at least their mean similarity to other-label nodes.

    Similarities are rows of ``S = (A_hat Z)(A_hat Z)^T``, evaluated as dot
    products against per-class sums of ``A_hat Z``.  ``include_self``
    controls whether ``u = v`` sits in the same-label multiset.  A node
    whose same- or other-label multiset is empty counts as satisfied.
    """
    b = aggregate_low_pass(g, g.one_hot(), kind)
    C = g.n_classes
    sizes = g.class_sizes()
    class_sum = np.zeros((C, C))
    np.add.at(class_sum, g.labels, b)
    grand = class_sum.sum(axis=0)
    z = g.labels
    same_sum = np.einsum("ij,ij->i", b, class_sum[z])
    diff_sum = b @ grand - same_sum
    same_cnt = sizes[z].astype(np.float64)
    if not include_self:
        same_sum = same_sum - np.einsum("ij,ij->i", b, b)
        same_cnt = same_cnt - 1
    diff_cnt = (g.n_nodes - sizes[z]).astype(np.float64)
    vacuous = (same_cnt <= 0) | (diff_cnt <= 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_same = same_sum / same_cnt
        mean_diff = diff_sum / diff_cnt
    slack = AGG_TIE_RTOL * np.maximum(np.abs(mean_same), np.abs(mean_diff))
    ok = vacuous | (mean_same >= mean_diff - slack)
    return float(np.count_nonzero(ok)) / g.n_nodes


def _degree_shares(g):
    total = g.degrees.sum()
    return np.bincount(g.labels, weights=g.degrees, minlength=g.n_classes) / total


def h_adj(g: Graph) -> float:
    """Edge homophily corrected for the degree-weighted class distribution."""
    _require_edges(g, "h_adj")
    p_bar = _degree_shares(g)
    expected = float(np.sum(p_bar ** 2))
    denom = 1.0 - expected
    if denom <= 1e-15:
        raise UndefinedMetricError("h_adj", "all edge endpoints lie in one class")
    return (h_edge(g) - expected) / denom


def label_informativeness(g: Graph) -> float:
    """How much a neighbour's label tells about a node's label (natural log)."""
    _require_edges(g, "li")
    counts = kernels.label_pair_counts(g.indptr, g.indices, g.labels, g.n_classes)
    p = counts / counts.sum()
    p_bar = _degree_shares(g)
    nz = p > 0
    num = float(np.sum(p[nz] * np.log(p[nz])))
    nzb = p_bar > 0
    den = float(np.sum(p_bar[nzb] * np.log(p_bar[nzb])))
    if den == 0.0:
        raise UndefinedMetricError("li", "all edge endpoints lie in one class")
    return 2.0 - num / den


@dataclass(frozen=True)
class HomophilyReport:
    h_edge: float
    h_node: float
    h_class: float
    h_agg: float
    h_ge: Optional[float]
    h_adj: float
    li: float
    per_node_homophily: Optional[np.ndarray] = None
    n_zero_degree: int = 0

    def to_dict(self) -> dict:
        out = {}
        for key in METRIC_KEYS:
            val = getattr(self, key)
            if val is not None:
                out[key] = float(val)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        d = self.to_dict()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(d))
        writer.writerow([repr(v) for v in d.values()])
        return buf.getvalue()


def compute_report(g: Graph, x=None, kind: AggregationKind = RANDOM_WALK,
                   include_self: bool = True) -> HomophilyReport:
    """Evaluate every metric; ``h_ge`` is skipped when ``x`` is None."""
    he = h_edge(g)
    hn, per_node = h_node(g)
    return HomophilyReport(
        h_edge=he,
        h_node=hn,
        h_class=h_class(g),
        h_agg=h_agg(g, kind, include_self),
        h_ge=None if x is None else h_ge(g, x),
        h_adj=h_adj(g),
        li=label_informativeness(g),
        per_node_homophily=per_node,
        n_zero_degree=int(np.count_nonzero(g.degrees == 0)),
    )
