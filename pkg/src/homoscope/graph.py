"""Immutable CSR graphs, text-format I/O, and the low/high-pass filters.

Edge files hold one ``u v`` pair per line (0-indexed, whitespace separated,
``#`` comments allowed).  Label files hold one integer per line; line ``i``
is the label of node ``i`` and the line count fixes the node count.
Feature files are comma-separated floats, one row per node.
"""

from __future__ import annotations

import enum
import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import kernels
from .errors import DegenerateNodeError, GraphFormatError

__all__ = [
    "AggregationKind",
    "Graph",
    "Normalization",
    "aggregate_high_pass",
    "aggregate_low_pass",
    "as_feature_matrix",
    "load_features",
    "load_graph",
    "write_features",
]


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Graph:
    """Sparse graph in CSR form with one class label per node.

    Undirected graphs store both directions of every edge, so row ``i`` of
    the CSR structure is always the neighbour set of node ``i``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray
    n_classes: int
    directed: bool = False
    _degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        indptr = _frozen(self.indptr, np.int64)
        indices = _frozen(self.indices, np.int64)
        labels = _frozen(self.labels, np.int64)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "labels", labels)
        n = len(indptr) - 1
        if n < 0 or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValueError("malformed CSR row offsets")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("CSR row offsets must be nondecreasing")
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} nodes")
        if n and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError("labels must lie in [0, n_classes)")
        if len(indices) and (indices.min() < 0 or indices.max() >= n):
            raise ValueError("column index out of range")
        if len(indices) > 1:
            step = np.diff(indices)
            row_starts = np.zeros(len(indices), dtype=bool)
            row_starts[indptr[:-1][indptr[:-1] < len(indices)]] = True
            if np.any((step <= 0) & ~row_starts[1:]):
                raise ValueError("column indices must be strictly increasing within rows")
        degrees = np.diff(indptr)
        degrees.setflags(write=False)
        object.__setattr__(self, "_degrees", degrees)

    @classmethod
    def from_edges(cls, n_nodes, edges, labels, *, directed=False,
                   allow_self_loops=False, n_classes=None):
        """Build a graph from an ``(m, 2)`` array of node pairs.

        Duplicate pairs collapse; undirected input is mirrored.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        labels = np.asarray(labels, dtype=np.int64)
        if len(labels) != n_nodes:
            raise ValueError(f"{len(labels)} labels for {n_nodes} nodes")
        if len(edges) and (edges.min() < 0 or edges.max() >= n_nodes):
            raise ValueError("edge endpoint out of range")
        if not allow_self_loops and np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loop present and allow_self_loops is False")
        src, dst = edges[:, 0], edges[:, 1]
        if not directed:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        key = np.unique(src * n_nodes + dst) if len(src) else np.zeros(0, np.int64)
        rows, cols = np.divmod(key, n_nodes) if n_nodes else (key, key)
        indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_nodes), out=indptr[1:])
        if n_classes is None:
            n_classes = int(labels.max()) + 1 if len(labels) else 0
        return cls(indptr, cols, labels, int(n_classes), bool(directed))

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def degrees(self) -> np.ndarray:
        """Row lengths of the CSR structure (out-degree if directed)."""
        return self._degrees

    @property
    def n_incidences(self) -> int:
        """Stored (u, v) entries; twice the edge count for undirected graphs
        without self-loops."""
        return len(self.indices)

    @property
    def n_self_loops(self) -> int:
        rows = np.repeat(np.arange(self.n_nodes), self._degrees)
        return int(np.count_nonzero(rows == self.indices))

    @property
    def n_edges(self) -> int:
        if self.directed:
            return self.n_incidences
        loops = self.n_self_loops
        return (self.n_incidences - loops) // 2 + loops

    def neighbors(self, v) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def one_hot(self) -> np.ndarray:
        z = np.zeros((self.n_nodes, self.n_classes))
        z[np.arange(self.n_nodes), self.labels] = 1.0
        return z

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array; undirected edges listed once as ``u <= v``."""
        rows = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self._degrees)
        pairs = np.column_stack([rows, self.indices])
        if not self.directed:
            pairs = pairs[pairs[:, 0] <= pairs[:, 1]]
        return pairs

    def write(self, edge_path, label_path):
        """Write the edge and label text formats read by :func:`load_graph`."""
        pairs = self.edge_array()
        with open(edge_path, "w", encoding="utf-8") as fh:
            for u, v in pairs:
                fh.write(f"{u} {v}\n")
        with open(label_path, "w", encoding="utf-8") as fh:
            for z in self.labels:
                fh.write(f"{z}\n")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n_classes == other.n_classes
            and self.directed == other.directed
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def _read_labels(path):
    labels = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    for lineno, line in enumerate(lines, 1):
        tok = line.strip()
        try:
            z = int(tok, 10)
        except ValueError:
            raise GraphFormatError(f"label {tok!r} is not an integer", path, lineno) from None
        if z < 0:
            raise GraphFormatError(f"negative label {z}", path, lineno)
        labels.append(z)
    return np.asarray(labels, dtype=np.int64)


def _read_edges(path, n_nodes, allow_self_loops):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.split()
            if not tok or tok[0].startswith("#"):
                continue
            if len(tok) != 2:
                raise GraphFormatError(f"expected 2 fields, found {len(tok)}", path, lineno)
            try:
                u, v = int(tok[0], 10), int(tok[1], 10)
            except ValueError:
                raise GraphFormatError(f"non-integer token in {line.strip()!r}", path, lineno) from None
            for w in (u, v):
                if w < 0 or w >= n_nodes:
                    raise GraphFormatError(
                        f"node index {w} outside [0, {n_nodes}) inferred from the label file",
                        path, lineno)
            if u == v and not allow_self_loops:
                raise GraphFormatError(f"self-loop on node {u}", path, lineno)
            pairs.append((u, v))
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def load_graph(edge_path, label_path, *, directed=False, allow_self_loops=False,
               n_classes=None) -> Graph:
    """Read a graph from an edge list and a label file.

    Raises :class:`GraphFormatError` with the offending line number for
    non-integer tokens, out-of-range node ids, and forbidden self-loops.
    """
    labels = _read_labels(label_path)
    edges = _read_edges(edge_path, len(labels), allow_self_loops)
    return Graph.from_edges(len(labels), edges, labels, directed=directed,
                            allow_self_loops=allow_self_loops, n_classes=n_classes)


def as_feature_matrix(x, n_nodes=None) -> np.ndarray:
    """Validate and convert to a C-contiguous float64 ``(n, F)`` array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {x.shape}")
    if n_nodes is not None and x.shape[0] != n_nodes:
        raise ValueError(f"feature matrix has {x.shape[0]} rows for {n_nodes} nodes")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix contains non-finite values")
    return x


def load_features(path, n_nodes) -> np.ndarray:
    """Read a CSV feature matrix with exactly ``n_nodes`` rows."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            x = np.loadtxt(io.StringIO(text), delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise GraphFormatError(f"ragged or non-numeric CSV ({exc})", path) from None
    if x.shape[0] != n_nodes:
        raise GraphFormatError(f"{x.shape[0]} feature rows for {n_nodes} nodes", path)
    bad = ~np.isfinite(x)
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        raise GraphFormatError("non-finite feature value", path, row + 1)
    return np.ascontiguousarray(x)


def write_features(path, x):
    np.savetxt(path, np.asarray(x, dtype=np.float64), delimiter=",", fmt="%.17g")


class Normalization(enum.Enum):
    RANDOM_WALK = "rw"
    SYMMETRIC = "sym"


@dataclass(frozen=True)
class AggregationKind:
    """Which normalised adjacency to use, and whether to add ``I`` first."""

    normalization: Normalization = Normalization.RANDOM_WALK
    add_self_loops: bool = False

    @classmethod
    def parse(cls, name, add_self_loops=False):
        return cls(Normalization(name), add_self_loops)

    def __str__(self):
        return self.normalization.value + ("+I" if self.add_self_loops else "")


RANDOM_WALK = AggregationKind()


def aggregate_low_pass(g: Graph, x, kind: AggregationKind = RANDOM_WALK) -> np.ndarray:
    """Apply the normalised adjacency to the rows of ``x``."""
    x = as_feature_matrix(x, g.n_nodes)
    self_w = 1.0 if kind.add_self_loops else 0.0
    deg = g.degrees.astype(np.float64) + self_w
    if kind.normalization is Normalization.RANDOM_WALK:
        zero = np.flatnonzero(deg == 0)
        if len(zero):
            raise DegenerateNodeError(zero)
        row_scale = 1.0 / deg
        col_scale = np.ones(g.n_nodes)
    else:
        with np.errstate(divide="ignore"):
            inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(deg), 0.0)
        row_scale = col_scale = inv_sqrt
    return kernels.csr_scaled_sum(g.indptr, g.indices, x, row_scale, col_scale, self_w)


def aggregate_high_pass(g: Graph, x, kind: AggregationKind = RANDOM_WALK) -> np.ndarray:
    """``x`` minus its low-pass filtered version."""
    x = as_feature_matrix(x, g.n_nodes)
    return x - aggregate_low_pass(g, x, kind)
