"""Random graph generators.

* :func:`generate_csbmh_graph` samples a directed two-class graph in which
  every node of class ``c`` has ``round(h d_c)`` same-class and
  ``d_c - round(h d_c)`` other-class out-neighbours, plus Gaussian features.
* :func:`generate_homophily_graph` samples an undirected multi-class graph
  with a fixed number of intra-class edges per class and enough inter-class
  edges to hit a target edge homophily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .csbmh import CsbmhParams
from .errors import PairExhaustionError
from .graph import Graph, _read_labels, load_features

__all__ = [
    "FromFile",
    "GaussianBlobs",
    "GeneratedGraph",
    "HomophilyGenSpec",
    "generate_csbmh_graph",
    "generate_homophily_graph",
    "round_half_up",
]


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class GeneratedGraph:
    graph: Graph
    features: np.ndarray
    realized_h_edge: float

    def __iter__(self):
        return iter((self.graph, self.features, self.realized_h_edge))


def generate_csbmh_graph(p: CsbmhParams, n0: int, n1: int, seed: int = 0) -> GeneratedGraph:
    """Directed two-class graph with per-node neighbour quotas.

    Nodes ``0..n0-1`` form class 0.  ``h * d_c`` is rounded half up to get
    the same-class out-degree (degrees themselves are rounded the same
    way).  ``realized_h_edge`` is the same-label share of all out-edges.
    """
    if n0 < 1 or n1 < 1:
        raise ValueError("both classes need at least one node")
    rng = np.random.default_rng(seed)
    sizes = (n0, n1)
    starts = (0, n0)
    degs = (round_half_up(p.d0), round_half_up(p.d1))
    src, dst = [], []
    for c in (0, 1):
        d = degs[c]
        intra = round_half_up(p.h * d)
        inter = d - intra
        if intra > sizes[c] - 1:
            raise PairExhaustionError(
                f"class {c} needs {intra} same-class neighbours but has {sizes[c] - 1} candidates")
        if inter > sizes[1 - c]:
            raise PairExhaustionError(
                f"class {c} needs {inter} other-class neighbours but the other class has "
                f"{sizes[1 - c]} nodes")
        other0 = starts[1 - c]
        for v in range(starts[c], starts[c] + sizes[c]):
            if intra:
                pick = rng.choice(sizes[c] - 1, size=intra, replace=False)
                pick = pick + starts[c]
                pick[pick >= v] += 1
                src.append(np.full(intra, v))
                dst.append(pick)
            if inter:
                pick = rng.choice(sizes[1 - c], size=inter, replace=False) + other0
                src.append(np.full(inter, v))
                dst.append(pick)
    labels = np.repeat([0, 1], sizes)
    if src:
        edges = np.column_stack([np.concatenate(src), np.concatenate(dst)])
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    g = Graph.from_edges(n0 + n1, edges, labels, directed=True, n_classes=2)
    sd = np.repeat([math.sqrt(p.sigma0_sq), math.sqrt(p.sigma1_sq)], sizes)
    means = np.where((labels == 0)[:, None], p.mu0, p.mu1)
    x = means + sd[:, None] * rng.standard_normal((n0 + n1, p.dim))
    total = len(edges)
    same = int(np.count_nonzero(labels[edges[:, 0]] == labels[edges[:, 1]])) if total else 0
    realized = same / total if total else math.nan
    return GeneratedGraph(g, x, realized)


@dataclass(frozen=True)
class GaussianBlobs:
    """Class ``c`` features ~ N(centre_c, I) with centres ~ N(0, spread^2 I)."""

    n_features: int = 16
    spread: float = 1.0


@dataclass(frozen=True)
class FromFile:
    """Reuse rows of an existing feature matrix, shuffled within each class.

    Synthetic class ``c`` draws its rows from source rows labelled ``c``.
    """

    features_path: Union[str, Path]
    labels_path: Union[str, Path]


@dataclass(frozen=True)
class HomophilyGenSpec:
    n_classes: int = 5
    nodes_per_class: int = 400
    intra_edges_per_class: int = 4000
    target_h_edge: float = 0.5
    feature_source: Union[GaussianBlobs, FromFile] = GaussianBlobs()
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.target_h_edge <= 1.0:
            raise ValueError("target_h_edge must lie in (0, 1]")
        if self.n_classes < 1 or self.nodes_per_class < 1 or self.intra_edges_per_class < 0:
            raise ValueError("class count, class size and edge count must be positive")

    @property
    def inter_edges_per_class(self) -> int:
        m = self.intra_edges_per_class
        return round_half_up(m / self.target_h_edge - m)


def _pair_keys(u, v, n):
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * n + hi


def _fresh(keys, taken):
    """Drop duplicates (keeping first occurrences) and keys in ``taken``."""
    _, first = np.unique(keys, return_index=True)
    keys = keys[np.sort(first)]
    if len(taken):
        keys = keys[~np.isin(keys, taken, assume_unique=False)]
    return keys


def _sample_keys(rng, need, draw, all_keys, taken, n_avail, what):
    """Sample ``need`` distinct pair keys absent from ``taken``.

    ``draw(m)`` returns ``m`` candidate keys (possibly repeated).  When more
    than half of the free pairs are requested, the free set is enumerated
    via ``all_keys()`` and sampled directly instead of by rejection.
    """
    if need == 0:
        return np.zeros(0, dtype=np.int64)
    if need > n_avail:
        raise PairExhaustionError(
            f"{what}: {need} distinct pairs requested but only {n_avail} are free")
    if need > n_avail // 2:
        free = _fresh(all_keys(), taken)
        return rng.choice(free, size=need, replace=False)
    chosen = np.zeros(0, dtype=np.int64)
    while len(chosen) < need:
        m = int(1.25 * (need - len(chosen))) + 16
        cand = _fresh(draw(m), np.concatenate([taken, chosen]))
        chosen = np.concatenate([chosen, cand[: need - len(chosen)]])
    return chosen


def _blob_features(rng, src: GaussianBlobs, labels, n_classes):
    centres = rng.standard_normal((n_classes, src.n_features)) * src.spread
    return centres[labels] + rng.standard_normal((len(labels), src.n_features))


def _file_features(rng, src: FromFile, labels, n_classes, per_class):
    src_labels = _read_labels(src.labels_path)
    x = load_features(src.features_path, len(src_labels))
    out = np.empty((len(labels), x.shape[1]))
    for c in range(n_classes):
        rows = np.flatnonzero(src_labels == c)
        if len(rows) < per_class:
            raise ValueError(
                f"source class {c} has {len(rows)} rows, {per_class} needed")
        out[labels == c] = x[rng.permutation(rows)[:per_class]]
    return out


def generate_homophily_graph(spec: HomophilyGenSpec) -> GeneratedGraph:
    """Undirected graph with ``intra_edges_per_class`` same-class edges and
    ``round(intra / target - intra)`` other-class edges per class.

    Pairs are distinct: a candidate that repeats an already placed edge is
    redrawn.  Requests beyond the number of free pairs raise
    :class:`PairExhaustionError` before anything is sampled when the
    per-class quotas cannot fit.
    """
    C, n_per = spec.n_classes, spec.nodes_per_class
    N = C * n_per
    m_in = spec.intra_edges_per_class
    m_out = spec.inter_edges_per_class
    intra_cap = n_per * (n_per - 1) // 2
    inter_cap = n_per * (N - n_per)
    if m_in > intra_cap:
        raise PairExhaustionError(
            f"{m_in} intra-class edges requested per class, only {intra_cap} pairs exist")
    if m_out > 0 and C < 2:
        raise PairExhaustionError("inter-class edges requested with a single class")
    if m_out > inter_cap:
        raise PairExhaustionError(
            f"{m_out} inter-class edges requested per class, only {inter_cap} pairs touch a "
            f"class of {n_per} nodes in a graph of {N}")
    total_inter_pairs = (N * N - C * n_per * n_per) // 2
    if C * m_out > total_inter_pairs:
        raise PairExhaustionError(
            f"{C * m_out} inter-class edges requested, only {total_inter_pairs} pairs exist")
    rng = np.random.default_rng(spec.seed)
    labels = np.repeat(np.arange(C), n_per)
    keys = []
    for c in range(C):
        base = c * n_per

        def draw_intra(m, base=base):
            u = rng.integers(0, n_per, m) + base
            v = rng.integers(0, n_per, m) + base
            ok = u != v
            return _pair_keys(u[ok], v[ok], N)

        def all_intra(base=base):
            iu, iv = np.triu_indices(n_per, 1)
            return _pair_keys(iu + base, iv + base, N)

        keys.append(_sample_keys(rng, m_in, draw_intra, all_intra,
                                 np.zeros(0, np.int64), intra_cap, f"class {c} intra"))
    inter_taken = np.zeros(0, dtype=np.int64)
    for c in range(C):
        base = c * n_per
        outside = np.concatenate([np.arange(0, base), np.arange(base + n_per, N)])

        def draw_inter(m, base=base, outside=outside):
            u = rng.integers(0, n_per, m) + base
            v = outside[rng.integers(0, len(outside), m)]
            return _pair_keys(u, v, N)

        def all_inter(base=base, outside=outside):
            u = np.repeat(np.arange(base, base + n_per), len(outside))
            v = np.tile(outside, n_per)
            return _pair_keys(u, v, N)

        # inter edges already placed that touch class c
        touching = inter_taken[
            ((inter_taken // N) // n_per == c) | ((inter_taken % N) // n_per == c)]
        free = inter_cap - len(touching)
        new = _sample_keys(rng, m_out, draw_inter, all_inter, touching, free,
                           f"class {c} inter")
        inter_taken = np.concatenate([inter_taken, new])
    all_keys = np.concatenate(keys + [inter_taken])
    edges = np.column_stack([all_keys // N, all_keys % N])
    g = Graph.from_edges(N, edges, labels, directed=False, n_classes=C)
    src = spec.feature_source
    if isinstance(src, GaussianBlobs):
        x = _blob_features(rng, src, labels, C)
    elif isinstance(src, FromFile):
        x = _file_features(rng, src, labels, C, n_per)
    else:
        raise TypeError(f"unknown feature source {src!r}")
    n_edges = len(all_keys)
    realized = (C * m_in) / n_edges if n_edges else math.nan
    return GeneratedGraph(g, x, realized)
