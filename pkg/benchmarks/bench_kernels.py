"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--nodes 20000] [--degree 10] [--repeat 5]

Prints one row per kernel with the best-of-``repeat`` wall time of each
backend and the speedup of the compiled one.
"""

import argparse
import timeit

import numpy as np

from homoscope._backend import get
from homoscope.graph import Graph


def build_inputs(n_nodes, degree, n_features, n_classes, seed):
    rng = np.random.default_rng(seed)
    m = n_nodes * degree // 2
    edges = rng.integers(0, n_nodes, size=(m, 2))
    edges = edges[edges[:, 0] != edges[:, 1]]
    labels = rng.integers(0, n_classes, n_nodes)
    g = Graph.from_edges(n_nodes, edges, labels, n_classes=n_classes)
    x = rng.normal(size=(n_nodes, n_features))
    deg = np.maximum(g.degrees, 1).astype(np.float64)
    emb = rng.normal(size=(1500, n_features))
    return g, x, 1.0 / deg, np.linalg.norm(x, axis=1), emb


def cases(g, x, inv_deg, norms, emb):
    ones = np.ones(g.n_nodes)
    return {
        "csr_scaled_sum": lambda k: k.csr_scaled_sum(g.indptr, g.indices, x, inv_deg, ones, 0.0),
        "same_label_counts": lambda k: k.same_label_counts(g.indptr, g.indices, g.labels),
        "label_pair_counts": lambda k: k.label_pair_counts(g.indptr, g.indices, g.labels,
                                                           g.n_classes),
        "edge_cosine_sum": lambda k: k.edge_cosine_sum(g.indptr, g.indices, x, norms),
        "nngp_gram": lambda k: k.nngp_gram(emb, emb),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=20000)
    parser.add_argument("--degree", type=int, default=10)
    parser.add_argument("--features", type=int, default=32)
    parser.add_argument("--classes", type=int, default=5)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    py = get("python")
    try:
        cy = get("cython")
    except ImportError:
        cy = None
        print("compiled kernels not built; timing the numpy fallback only")

    inputs = build_inputs(args.nodes, args.degree, args.features, args.classes, args.seed)
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in cases(*inputs).items():
        t_py = min(timeit.repeat(lambda: call(py), number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:<20}{1e3 * t_py:>14.2f}{'-':>14}{'-':>10}")
            continue
        t_cy = min(timeit.repeat(lambda: call(cy), number=1, repeat=args.repeat))
        print(f"{name:<20}{1e3 * t_py:>14.2f}{1e3 * t_cy:>14.2f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
