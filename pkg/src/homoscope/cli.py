"""``homoscope`` command line interface.

Exit codes: 0 success, 2 usage or input parse error, 3 undefined metric,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .cpm import Classifier, CpmConfig, cpm_pvalue, prop_pvalue, prop_statistic
from .csbmh import ALL_MEASURES, CsbmhParams, params_from_json, sweep
from .errors import (
    AccuracyError,
    DegenerateNodeError,
    GraphFormatError,
    HomoscopeError,
    PairExhaustionError,
    SolverError,
    UndefinedMetricError,
)
from .graph import AggregationKind, load_features, load_graph, write_features, _read_labels
from .homophily import compute_report
from .synthgen import (
    FromFile,
    GaussianBlobs,
    HomophilyGenSpec,
    generate_csbmh_graph,
    generate_homophily_graph,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNDEFINED = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    """Bad flag values or unreadable inputs detected after parsing."""


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _env_threads():
    raw = os.environ.get("HOMOSCOPE_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default,
                        help="random seed (default 0)")
    parser.add_argument("--threads", type=int, default=default,
                        help="worker threads (default $HOMOSCOPE_THREADS or 1)")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=default,
                     help="write JSON output")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", default=default,
                     help="write CSV output")


def _graph_options(p, features_required=False):
    p.add_argument("--edges", required=True, help="edge list file")
    p.add_argument("--labels", required=True, help="label file")
    p.add_argument("--features", required=features_required, help="feature CSV")
    d = p.add_mutually_exclusive_group()
    d.add_argument("--undirected", dest="directed", action="store_false",
                   help="treat edges as undirected (default)")
    d.add_argument("--directed", dest="directed", action="store_true",
                   help="treat edges as directed")
    p.set_defaults(directed=False)
    p.add_argument("--allow-self-loops", action="store_true",
                   help="accept self-loops in the edge file")
    p.add_argument("--agg", choices=("rw", "sym"), default="rw",
                   help="normalised adjacency for aggregation (default rw)")
    p.add_argument("--self-loops", action="store_true",
                   help="add the identity before normalising")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homoscope",
        description="Homophily metrics, CSBM-H sweeps and classifier-based tests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("metrics", parents=[common], help="homophily metrics of a graph")
    _graph_options(p)
    p.add_argument("--exclude-self", action="store_true",
                   help="leave u = v out of the same-label mean in h_agg")
    p.add_argument("--out", default="-", help="output path (default stdout)")

    p = sub.add_parser("sweep", parents=[common], help="CSBM-H homophily sweep")
    p.add_argument("--config", required=True, help="JSON parameter file")
    p.add_argument("--measures", default=",".join(ALL_MEASURES),
                   help="comma-separated subset of pbe,dngj,nswd,nshd")
    p.add_argument("--out", default="-")

    p = sub.add_parser("cpm", parents=[common], help="classifier-based p-value")
    _graph_options(p, features_required=True)
    p.add_argument("--classifier", choices=[c.value for c in Classifier], default="kr-nngp")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--train-frac", type=float, default=0.6)
    p.add_argument("--ridge", type=float, default=1e-8)
    p.add_argument("--out", default="-")

    gen = sub.add_parser("gen", help="generate synthetic graphs")
    gsub = gen.add_subparsers(dest="model", metavar="MODEL")
    gsub.required = True
    p = gsub.add_parser("csbmh", parents=[common], help="directed two-class CSBM-H graph")
    p.add_argument("--config", help="JSON parameter file (sweep format plus optional h)")
    p.add_argument("--mu0", type=_float_list, default=[-1.0, 0.0])
    p.add_argument("--mu1", type=_float_list, default=[0.0, 1.0])
    p.add_argument("--sigma0-sq", type=float, default=1.0)
    p.add_argument("--sigma1-sq", type=float, default=2.0)
    p.add_argument("--d0", type=float, default=5.0)
    p.add_argument("--d1", type=float, default=5.0)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--n0", type=int, default=500)
    p.add_argument("--n1", type=int, default=500)
    p.add_argument("--out-dir", required=True)
    p = gsub.add_parser("homophily", parents=[common], help="undirected graph at a target h_edge")
    p.add_argument("--target-h", type=float, required=True)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--nodes-per-class", type=int, default=400)
    p.add_argument("--intra-edges", type=int, default=4000)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--source-features", help="reuse rows of this feature CSV")
    p.add_argument("--source-labels", help="labels of --source-features")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("prop", parents=[common], help="compare Prop statistics of two models")
    p.add_argument("--embeddings-a", required=True, help="directory of embedding CSVs")
    p.add_argument("--embeddings-b", required=True, help="directory of embedding CSVs")
    p.add_argument("--labels", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--pairs", type=int, default=300)
    p.add_argument("--out", default="-")
    return parser


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(path).write_text(text, encoding="utf-8")


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _agg(args):
    return AggregationKind.parse(args.agg, args.self_loops)


def _load(args):
    g = load_graph(args.edges, args.labels, directed=args.directed,
                   allow_self_loops=args.allow_self_loops)
    x = load_features(args.features, g.n_nodes) if args.features else None
    return g, x


def cmd_metrics(args):
    g, x = _load(args)
    report = compute_report(g, x, _agg(args), include_self=not args.exclude_self)
    _write(args.out, report.to_csv() if args.fmt == "csv" else report.to_json())


def cmd_sweep(args):
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        params, grid = params_from_json(text)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from None
    measures = [m.strip() for m in args.measures.split(",") if m.strip()]
    bad = [m for m in measures if m not in ALL_MEASURES]
    if bad:
        raise UsageError(f"unknown measures {bad}; choose from {','.join(ALL_MEASURES)}")
    try:
        result = sweep(params, grid, measures, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, result.to_json() if args.fmt == "json" else result.to_csv())


def cmd_cpm(args):
    g, x = _load(args)
    try:
        cfg = CpmConfig(n_sample=args.samples, train_fraction=args.train_frac,
                        repeats=args.repeats, seed=args.seed,
                        classifier=Classifier(args.classifier), aggregation=_agg(args),
                        ridge=args.ridge, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = cpm_pvalue(g, x, cfg)
    for w in caught:
        print(f"homoscope: warning: {w.message}", file=sys.stderr)
    _write(args.out, report.to_json())


def _write_graph_dir(out_dir, result, manifest):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.graph.write(out / "edges.txt", out / "labels.txt")
    write_features(out / "features.csv", result.features)
    manifest = dict(manifest)
    manifest.update({
        "n_nodes": result.graph.n_nodes,
        "n_edges": result.graph.n_edges,
        "directed": result.graph.directed,
        "realized_h_edge": result.realized_h_edge,
        "files": {"edges": "edges.txt", "labels": "labels.txt", "features": "features.csv"},
    })
    (out / "manifest.json").write_text(_json(manifest), encoding="utf-8")


def cmd_gen(args):
    if args.model == "csbmh":
        try:
            if args.config:
                cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
                params, _ = params_from_json(json.dumps(cfg))
                h = cfg.get("h", 0.5) if args.h is None else args.h
            else:
                params = CsbmhParams(args.mu0, args.mu1, args.sigma0_sq, args.sigma1_sq,
                                     args.d0, args.d1)
                h = 0.5 if args.h is None else args.h
            params = params.with_h(h)
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad CSBM-H parameters: {exc}") from None
        result = generate_csbmh_graph(params, args.n0, args.n1, args.seed)
        manifest = {
            "model": "csbmh", "seed": args.seed, "n0": args.n0, "n1": args.n1,
            "mu0": params.mu0.tolist(), "mu1": params.mu1.tolist(),
            "sigma0_sq": params.sigma0_sq, "sigma1_sq": params.sigma1_sq,
            "d0": params.d0, "d1": params.d1, "h": params.h,
        }
    else:
        if args.source_features or args.source_labels:
            if not (args.source_features and args.source_labels):
                raise UsageError("--source-features and --source-labels go together")
            source = FromFile(args.source_features, args.source_labels)
        else:
            source = GaussianBlobs(args.feature_dim, args.spread)
        try:
            spec = HomophilyGenSpec(args.classes, args.nodes_per_class, args.intra_edges,
                                    args.target_h, source, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = generate_homophily_graph(spec)
        manifest = {
            "model": "homophily", "seed": args.seed, "n_classes": spec.n_classes,
            "nodes_per_class": spec.nodes_per_class,
            "intra_edges_per_class": spec.intra_edges_per_class,
            "inter_edges_per_class": spec.inter_edges_per_class,
            "target_h_edge": spec.target_h_edge,
        }
    _write_graph_dir(args.out_dir, result, manifest)


def _prop_runs(directory, labels, args):
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"{directory} is not a directory")
    files = sorted(f for f in d.iterdir() if f.suffix == ".csv" and f.is_file())
    if not files:
        raise UsageError(f"no embedding CSV files in {directory}")
    props = []
    runs = []
    for f in files:
        emb = load_features(f, len(labels))
        rep = prop_statistic(emb, labels, args.pairs, args.alpha, args.seed)
        props.append(rep.prop)
        runs.append({"file": f.name, **rep.to_dict()})
    return props, runs


def cmd_prop(args):
    labels = _read_labels(args.labels)
    props_a, runs_a = _prop_runs(args.embeddings_a, labels, args)
    props_b, runs_b = _prop_runs(args.embeddings_b, labels, args)
    if len(props_a) < 2 or len(props_b) < 2:
        raise UsageError("each embedding directory needs at least two runs")
    test = prop_pvalue(props_a, props_b)
    out = {"props_a": props_a, "props_b": props_b, "runs_a": runs_a, "runs_b": runs_b,
           **test.to_dict()}
    _write(args.out, _json(out))


COMMANDS = {"metrics": cmd_metrics, "sweep": cmd_sweep, "cpm": cmd_cpm,
            "gen": cmd_gen, "prop": cmd_prop}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.seed is None:
        args.seed = 0
    if args.threads is None:
        args.threads = _env_threads()
    if args.threads < 1:
        print("homoscope: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except (UsageError, GraphFormatError, PairExhaustionError) as exc:
        print(f"homoscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UndefinedMetricError, DegenerateNodeError) as exc:
        print(f"homoscope: error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (AccuracyError, SolverError) as exc:
        print(f"homoscope: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HomoscopeError as exc:
        print(f"homoscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"homoscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
