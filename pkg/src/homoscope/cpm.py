"""Classifier-based comparison of raw versus graph-aggregated features.

Two training-free classifiers (kernel regression with an NNGP or cosine
kernel, and Gaussian naive Bayes) are fitted on many random node samples,
once on the raw features ``X`` and once on the aggregated features
``H = A_hat X``.  A one-sided Welch test on the two accuracy samples gives
the score.  This module also holds the per-node distance test behind the
Prop statistic for externally trained embeddings.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from ._backend import kernels
from .errors import ClassAbsentError, HomoscopeError, SolverError
from .graph import RANDOM_WALK, AggregationKind, Graph, aggregate_low_pass, as_feature_matrix
from .stats import Alternative, TTestResult, welch_ttest

__all__ = [
    "Classifier",
    "CpmConfig",
    "CpmReport",
    "PropReport",
    "SstVerdict",
    "NtVerdict",
    "cpm_pvalue",
    "gnb_fit_predict",
    "kernel_regression_predict",
    "linear_gram",
    "linear_kernel",
    "nngp_gram",
    "nngp_kernel",
    "prop_pvalue",
    "prop_statistic",
]


# ---------------------------------------------------------------- kernels

def nngp_kernel(u, v) -> float:
    """ReLU NNGP kernel (arc-cosine kernel of degree one); 0 for zero rows."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu2, nv2 = float(u @ u), float(v @ v)
    if nu2 == 0.0 or nv2 == 0.0:
        return 0.0
    dot = float(u @ v)
    cos = min(1.0, max(-1.0, dot / math.sqrt(nu2 * nv2)))
    rest = max(nu2 * nv2 - dot * dot, 0.0)
    return (dot * (math.pi - math.acos(cos)) + math.sqrt(rest)) / (2.0 * math.pi)


def linear_kernel(u, v) -> float:
    """Cosine similarity; 0 when either vector is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    denom = float(np.linalg.norm(u) * np.linalg.norm(v))
    if denom == 0.0:
        return 0.0
    return float(u @ v) / denom


def nngp_gram(a, b=None) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = a if b is None else np.ascontiguousarray(b, dtype=np.float64)
    return np.asarray(kernels.nngp_gram(a, b))


def _unit_rows(x):
    norms = np.linalg.norm(x, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    return x / safe[:, None]


def linear_gram(a, b=None) -> np.ndarray:
    ua = _unit_rows(np.asarray(a, dtype=np.float64))
    ub = ua if b is None else _unit_rows(np.asarray(b, dtype=np.float64))
    return ua @ ub.T


# ------------------------------------------------------------ classifiers

def kernel_regression_predict(K_train, K_test_train, Z_train, ridge: float = 0.0) -> np.ndarray:
    """Predict labels with ``argmax(K_test_train (K_train + ridge I)^-1 Z_train)``.

    Ties in the argmax go to the lowest class id.
    """
    K_train = np.asarray(K_train, dtype=np.float64)
    K_test_train = np.asarray(K_test_train, dtype=np.float64)
    Z_train = np.asarray(Z_train, dtype=np.float64)
    n = K_train.shape[0]
    if K_train.shape != (n, n) or K_test_train.shape[1] != n or Z_train.shape[0] != n:
        raise ValueError("kernel and target shapes disagree")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    system = K_train + ridge * np.eye(n)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            alpha = scipy.linalg.solve(system, Z_train, check_finite=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError) as exc:
        raise SolverError(
            f"kernel system is singular to working precision ({exc}); increase the ridge"
        ) from None
    scores = K_test_train @ alpha
    return np.argmax(scores, axis=1)


def gnb_fit_predict(X_train, y_train, X_test, classes=None) -> np.ndarray:
    """Gaussian naive Bayes with priors from training frequencies.

    Every per-class feature variance gets ``1e-9 * max feature variance``
    added.  Without ``classes`` the model uses the classes present in
    ``y_train``; with it, a class missing from training raises
    :class:`ClassAbsentError`.  Ties go to the lowest class id.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    X_test = np.asarray(X_test, dtype=np.float64)
    y_train = np.asarray(y_train)
    present = np.unique(y_train)
    if classes is None:
        classes = present
    else:
        classes = np.asarray(sorted(set(int(c) for c in classes)))
        missing = np.setdiff1d(classes, present)
        if len(missing):
            raise ClassAbsentError(f"classes without training samples: {missing.tolist()}")
    floor = 1e-9 * float(np.max(np.var(X_train, axis=0)))
    floor = max(floor, np.finfo(np.float64).tiny)
    n = len(y_train)
    log_post = np.empty((len(X_test), len(classes)))
    for i, c in enumerate(classes):
        xc = X_train[y_train == c]
        mean = xc.mean(axis=0)
        var = xc.var(axis=0) + floor
        log_lik = -0.5 * np.sum(np.log(2.0 * np.pi * var)) \
            - 0.5 * np.sum((X_test - mean) ** 2 / var, axis=1)
        log_post[:, i] = math.log(len(xc) / n) + log_lik
    return classes[np.argmax(log_post, axis=1)]


# ------------------------------------------------------------------- CPM

class Classifier(enum.Enum):
    KR_NNGP = "kr-nngp"
    KR_LINEAR = "kr-linear"
    GNB = "gnb"


class NtVerdict(enum.Enum):
    GRAPH_AWARE = "graph-aware"
    GRAPH_AGNOSTIC = "graph-agnostic"


class SstVerdict(enum.Enum):
    GRAPH_AWARE = "graph-aware"
    GRAPH_AGNOSTIC = "graph-agnostic"
    NO_DIFFERENCE = "no-difference"


@dataclass(frozen=True)
class CpmConfig:
    n_sample: int = 500
    train_fraction: float = 0.6
    repeats: int = 100
    seed: int = 0
    classifier: Classifier = Classifier.KR_NNGP
    aggregation: AggregationKind = RANDOM_WALK
    ridge: float = 1e-8
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "classifier", Classifier(self.classifier))
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.repeats < 2:
            raise ValueError("repeats must be at least 2")
        if self.n_sample < 2:
            raise ValueError("n_sample must be at least 2")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass(frozen=True)
class CpmReport:
    """Accuracy samples and test outcome.

    ``score`` is the p-value of the one-sided test whose alternative is
    "aggregated features are less accurate"; values near 1 favour the
    graph-aware side.  ``p_agnostic`` is the p-value of the reversed
    alternative ("aggregated features are more accurate").
    """

    acc_x: np.ndarray
    acc_h: np.ndarray
    t_stat: float
    dof: float
    score: float
    p_agnostic: float
    n_sample: int
    config: CpmConfig

    @property
    def p_value(self) -> float:
        return self.score

    @property
    def verdict_nt05(self) -> NtVerdict:
        return NtVerdict.GRAPH_AWARE if self.score > 0.5 else NtVerdict.GRAPH_AGNOSTIC

    @property
    def verdict_sst005(self) -> SstVerdict:
        if self.score < 0.05:
            return SstVerdict.GRAPH_AGNOSTIC
        if self.score > 0.95:
            return SstVerdict.GRAPH_AWARE
        return SstVerdict.NO_DIFFERENCE

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "classifier": cfg.classifier.value,
            "aggregation": str(cfg.aggregation),
            "n_sample": self.n_sample,
            "train_fraction": cfg.train_fraction,
            "repeats": cfg.repeats,
            "ridge": cfg.ridge,
            "seed": cfg.seed,
            "mean_acc_x": float(np.mean(self.acc_x)),
            "mean_acc_h": float(np.mean(self.acc_h)),
            "t_stat": self.t_stat,
            "dof": self.dof,
            "score": self.score,
            "p_h_less_accurate": self.score,
            "p_h_more_accurate": self.p_agnostic,
            "verdict_nt05": self.verdict_nt05.value,
            "verdict_sst005": self.verdict_sst005.value,
            "acc_x": [float(v) for v in self.acc_x],
            "acc_h": [float(v) for v in self.acc_h],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _fit_predict(cfg, feats, train, test, y, n_classes):
    if cfg.classifier is Classifier.GNB:
        return gnb_fit_predict(feats[train], y[train], feats[test])
    gram = nngp_gram if cfg.classifier is Classifier.KR_NNGP else linear_gram
    k_tt = gram(feats[train])
    k_st = gram(feats[test], feats[train])
    ridge = cfg.ridge * float(np.mean(np.diag(k_tt)))
    z = np.zeros((len(train), n_classes))
    z[np.arange(len(train)), y[train]] = 1.0
    return kernel_regression_predict(k_tt, k_st, z, ridge)


def _round(i, cfg, x, h, y, pool, n_sample, n_classes):
    rng = np.random.default_rng([cfg.seed, i])
    nodes = rng.choice(pool, size=n_sample, replace=False)
    n_train = int(round(cfg.train_fraction * n_sample))
    n_train = min(max(n_train, 1), n_sample - 1)
    train, test = nodes[:n_train], nodes[n_train:]
    try:
        acc_x = float(np.mean(_fit_predict(cfg, x, train, test, y, n_classes) == y[test]))
        acc_h = float(np.mean(_fit_predict(cfg, h, train, test, y, n_classes) == y[test]))
    except HomoscopeError as exc:
        exc.round_index = i
        exc.args = (f"round {i}: {exc}",)
        raise
    return acc_x, acc_h


def cpm_pvalue(g: Graph, x, cfg: CpmConfig = CpmConfig(), labeled=None) -> CpmReport:
    """Run the repeated sample/split/fit protocol and test the accuracies.

    ``labeled`` optionally restricts sampling to a subset of node ids.  Each
    round uses a generator seeded from ``(cfg.seed, round)``, so serial and
    threaded runs give identical reports.
    """
    x = as_feature_matrix(x, g.n_nodes)
    h = aggregate_low_pass(g, x, cfg.aggregation)
    pool = np.arange(g.n_nodes) if labeled is None else np.asarray(labeled, dtype=np.int64)
    n_sample = cfg.n_sample
    if n_sample > len(pool):
        warnings.warn(f"n_sample={n_sample} exceeds {len(pool)} labeled nodes; clamping",
                      RuntimeWarning, stacklevel=2)
        n_sample = len(pool)
    if n_sample < 2:
        raise ValueError("need at least two labeled nodes")
    y = g.labels

    def run(i):
        return _round(i, cfg, x, h, y, pool, n_sample, g.n_classes)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            accs = list(ex.map(run, range(cfg.repeats)))
    else:
        accs = [run(i) for i in range(cfg.repeats)]
    acc_x = np.array([a[0] for a in accs])
    acc_h = np.array([a[1] for a in accs])
    less = welch_ttest(acc_h, acc_x, Alternative.LESS)
    greater = welch_ttest(acc_h, acc_x, Alternative.GREATER)
    return CpmReport(acc_x, acc_h, less.t_stat, less.dof, less.p_value,
                     greater.p_value, n_sample, cfg)


# ------------------------------------------------------------------ Prop

@dataclass(frozen=True)
class PropReport:
    """Per-node intra- versus inter-class distance test summary.

    ``prop`` is ``n_significant / n_evaluated``.  Marginal nodes reject
    neither one-sided alternative; they stay in the denominator.  Nodes
    without two intra-class and two inter-class distances are excluded.
    """

    prop: float
    n_significant: int
    n_marginal: int
    n_excluded: int
    n_evaluated: int
    per_node_pvalues: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "prop": self.prop,
            "n_significant": self.n_significant,
            "n_marginal": self.n_marginal,
            "n_excluded": self.n_excluded,
            "n_evaluated": self.n_evaluated,
        }


def _draw(rng, candidates, budget):
    if len(candidates) <= budget:
        return candidates
    return np.sort(rng.choice(candidates, size=budget, replace=False))


def prop_statistic(emb, labels, pairs_per_node: int = 300, alpha: float = 0.05,
                   seed: int = 0) -> PropReport:
    """Share of nodes whose distances to same-class nodes are significantly
    smaller (one-sided Welch test at level ``alpha``) than to other-class
    nodes.  Up to ``pairs_per_node`` partners of each kind are sampled per
    node, with a generator seeded from ``(seed, node)``."""
    emb = np.asarray(emb, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if emb.ndim != 2 or len(emb) != len(labels):
        raise ValueError("embedding rows must match the label count")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    if pairs_per_node < 2:
        raise ValueError("pairs_per_node must be at least 2")
    n = len(labels)
    members = {int(c): np.flatnonzero(labels == c) for c in classes}
    pvals = np.full(n, np.nan)
    n_sig = n_marg = n_excl = 0
    for v in range(n):
        own = members[int(labels[v])]
        intra_pool = own[own != v]
        inter_pool = np.flatnonzero(labels != labels[v])
        if len(intra_pool) < 2 or len(inter_pool) < 2:
            n_excl += 1
            continue
        rng = np.random.default_rng([seed, v])
        intra = _draw(rng, intra_pool, pairs_per_node)
        inter = _draw(rng, inter_pool, pairs_per_node)
        d_in = np.linalg.norm(emb[intra] - emb[v], axis=1)
        d_out = np.linalg.norm(emb[inter] - emb[v], axis=1)
        p_less = welch_ttest(d_in, d_out, Alternative.LESS).p_value
        pvals[v] = p_less
        if p_less < alpha:
            n_sig += 1
        elif welch_ttest(d_in, d_out, Alternative.GREATER).p_value >= alpha:
            n_marg += 1
    evaluated = n - n_excl
    prop = n_sig / evaluated if evaluated else 0.0
    return PropReport(prop, n_sig, n_marg, n_excl, evaluated, pvals)


def prop_pvalue(props_a, props_b) -> TTestResult:
    """Welch test of ``mean(props_a) < mean(props_b)``."""
    return welch_ttest(props_a, props_b, Alternative.LESS)
