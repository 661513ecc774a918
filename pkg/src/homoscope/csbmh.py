"""Two-class contextual SBM with a homophily knob: filtered feature
distributions, the optimal Bayes classifier, its error, divergence-based
distinguishability measures and homophily sweeps.

Each class ``c`` has isotropic Gaussian features ``N(mu_c, sigma_c^2 I)``
and draws ``h * d_c`` neighbours from its own class and ``(1 - h) * d_c``
from the other.  Mean aggregation (low-pass, LP) and its complement
(high-pass, HP) therefore yield Gaussians with closed-form parameters.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.special import expit

from .gchi2 import WEIGHT_EPS, quadratic_form_cdf

__all__ = [
    "ALL_MEASURES",
    "BayesCoefficients",
    "Channel",
    "CsbmhParams",
    "GaussianPair",
    "SweepResult",
    "bayes_coefficients",
    "d_hp_distance",
    "d_ngj",
    "d_ngj_prior",
    "default_h_grid",
    "filtered_params",
    "monte_carlo_bayes_error",
    "nshd",
    "nswd",
    "params_from_json",
    "pbe",
    "posterior_eta",
    "sweep",
    "concentration_bound",
    "variance_fp",
    "variance_hp",
    "variance_lp",
]


class Channel(enum.Enum):
    FP = "fp"
    LP = "lp"
    HP = "hp"


# tie-break order for regime labels
CHANNEL_PRIORITY = (Channel.FP, Channel.LP, Channel.HP)

ALL_MEASURES = ("pbe", "dngj", "nswd", "nshd")


@dataclass(frozen=True)
class CsbmhParams:
    mu0: np.ndarray
    mu1: np.ndarray
    sigma0_sq: float
    sigma1_sq: float
    d0: float
    d1: float
    h: float = 0.5
    prior_p0: float = 0.5

    def __post_init__(self):
        mu0 = np.array(self.mu0, dtype=np.float64).ravel()
        mu1 = np.array(self.mu1, dtype=np.float64).ravel()
        mu0.setflags(write=False)
        mu1.setflags(write=False)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "mu1", mu1)
        if mu0.shape != mu1.shape or mu0.size == 0:
            raise ValueError("mu0 and mu1 must be nonempty vectors of equal length")
        if not (self.sigma0_sq > 0 and self.sigma1_sq > 0):
            raise ValueError("variances must be positive")
        if not (self.d0 > 0 and self.d1 > 0):
            raise ValueError("degrees must be positive")
        if not 0.0 <= self.h <= 1.0:
            raise ValueError(f"h must lie in [0, 1], got {self.h}")
        if not 0.0 < self.prior_p0 < 1.0:
            raise ValueError(f"prior_p0 must lie in (0, 1), got {self.prior_p0}")

    @property
    def dim(self) -> int:
        return len(self.mu0)

    def with_h(self, h: float) -> "CsbmhParams":
        return CsbmhParams(self.mu0, self.mu1, self.sigma0_sq, self.sigma1_sq,
                           self.d0, self.d1, float(h), self.prior_p0)


@dataclass(frozen=True)
class GaussianPair:
    """Class-conditional isotropic Gaussians of one filter channel."""

    mean0: np.ndarray
    mean1: np.ndarray
    var0: float
    var1: float
    label: Channel = Channel.FP

    def __post_init__(self):
        m0 = np.array(self.mean0, dtype=np.float64).ravel()
        m1 = np.array(self.mean1, dtype=np.float64).ravel()
        object.__setattr__(self, "mean0", m0)
        object.__setattr__(self, "mean1", m1)
        if m0.shape != m1.shape:
            raise ValueError("class means must have equal length")
        if not (self.var0 > 0 and self.var1 > 0):
            raise ValueError("variances must be positive")

    @property
    def dim(self) -> int:
        return len(self.mean0)

    @property
    def dist_sq(self) -> float:
        diff = self.mean0 - self.mean1
        return float(diff @ diff)

    def swapped(self) -> "GaussianPair":
        return GaussianPair(self.mean1, self.mean0, self.var1, self.var0, self.label)


def filtered_params(p: CsbmhParams) -> dict[Channel, GaussianPair]:
    """Feature distributions of the raw (FP), aggregated (LP) and
    residual (HP) channels at homophily ``p.h``."""
    h = p.h
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"h must lie in [0, 1], got {h}")
    mu0, mu1 = p.mu0, p.mu1
    s0, s1 = p.sigma0_sq, p.sigma1_sq
    lp_mean0 = h * (mu0 - mu1) + mu1
    lp_mean1 = h * (mu1 - mu0) + mu0
    lp_var0 = (h * (s0 - s1) + s1) / p.d0
    lp_var1 = (h * (s1 - s0) + s0) / p.d1
    return {
        Channel.FP: GaussianPair(mu0, mu1, s0, s1, Channel.FP),
        Channel.LP: GaussianPair(lp_mean0, lp_mean1, lp_var0, lp_var1, Channel.LP),
        Channel.HP: GaussianPair((1 - h) * (mu0 - mu1), (1 - h) * (mu1 - mu0),
                                 s0 + lp_var0, s1 + lp_var1, Channel.HP),
    }


@dataclass(frozen=True)
class BayesCoefficients:
    """``Q(x) = a x.x + b.x + c``; the Bayes rule predicts class 1 iff Q <= 0."""

    a: float
    b: np.ndarray
    c: float

    def q(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.a * np.sum(x * x, axis=-1) + x @ self.b + self.c


def bayes_coefficients(pair: GaussianPair, prior_p0: float = 0.5) -> BayesCoefficients:
    """Coefficients of the log-odds ``Q(x) = ln[p0 f0(x) / (p1 f1(x))]``."""
    s0, s1 = pair.var0, pair.var1
    F = pair.dim
    m0, m1 = pair.mean0, pair.mean1
    p1 = 1.0 - prior_p0
    a = 0.5 * (1.0 / s1 - 1.0 / s0)
    b = m0 / s0 - m1 / s1
    # ln(sigma1^F / sigma0^F) = (F/2) ln(s1/s0)
    c = (float(m1 @ m1) / (2 * s1) - float(m0 @ m0) / (2 * s0)
         + math.log(prior_p0 / p1) + 0.5 * F * math.log(s1 / s0))
    return BayesCoefficients(a, b, c)


def posterior_eta(coef: BayesCoefficients, x) -> np.ndarray | float:
    """P(class 1 | x) = 1 / (1 + exp(Q(x))), saturating cleanly for large |Q|."""
    q = np.asarray(coef.q(x), dtype=np.float64)
    eta = np.where(q > 700.0, 0.0, np.where(q < -700.0, 1.0, expit(-np.clip(q, -700, 700))))
    return float(eta) if np.ndim(eta) == 0 else eta


def pbe(pair: GaussianPair, prior_p0: float = 0.5) -> float:
    """Bayes error of the optimal classifier on ``pair``.

    ``p0 P(Q <= 0 | class 0) + p1 P(Q > 0 | class 1)`` with ``Q`` a
    quadratic form in a Gaussian vector, i.e. a generalized chi-square
    variable (normal when the variances match).
    """
    coef = bayes_coefficients(pair, prior_p0)
    p1 = 1.0 - prior_p0
    if abs(coef.a) < WEIGHT_EPS and not np.any(coef.b):
        # Q is the constant c
        return prior_p0 if coef.c <= 0 else p1
    a = 0.0 if abs(coef.a) < WEIGHT_EPS else coef.a
    err0 = quadratic_form_cdf(a, coef.b, coef.c, pair.mean0, pair.var0)
    err1 = 1.0 - quadratic_form_cdf(a, coef.b, coef.c, pair.mean1, pair.var1)
    return float(prior_p0 * err0 + p1 * err1)


def d_ngj(pair: GaussianPair) -> tuple[float, float, float]:
    """Negative symmetric KL (balanced prior) and its two components.

    Returns ``(total, ennd, nvr)``: the normalised-distance term and the
    variance-ratio term, both nonpositive.
    """
    s0, s1 = pair.var0, pair.var1
    ennd = -pair.dist_sq * (1.0 / (4 * s1) + 1.0 / (4 * s0))
    r2 = s0 / s1
    nvr = -(pair.dim / 4.0) * (r2 + 1.0 / r2 - 2.0)
    return ennd + nvr, ennd, nvr


def d_ngj_prior(pair: GaussianPair, prior_p0: float) -> float:
    """Prior-weighted negative KL: ``-(p0 KL(P0||P1) + p1 KL(P1||P0))``.

    At ``prior_p0 = 0.5`` this equals the balanced ``d_ngj`` total.
    """
    p0, p1 = prior_p0, 1.0 - prior_p0
    F = pair.dim
    s0, s1 = pair.var0, pair.var1
    log_rho = 0.5 * math.log(s0 / s1)
    r2 = s0 / s1
    d2 = pair.dist_sq
    return (F * log_rho * (p0 - p1)
            - 0.5 * F * (p0 * r2 + p1 / r2 - 1.0)
            - d2 * (p0 / (2 * s1) + p1 / (2 * s0)))


def nswd(pair: GaussianPair) -> float:
    """Negative squared 2-Wasserstein distance between the two Gaussians."""
    ds = math.sqrt(pair.var0) - math.sqrt(pair.var1)
    return -pair.dist_sq - pair.dim * ds * ds


def nshd(pair: GaussianPair) -> float:
    """Negative squared Hellinger distance, in [-1, 0]."""
    r2 = pair.var0 / pair.var1
    bc = (2.0 / (r2 + 1.0 / r2)) ** (0.5 * pair.dim)
    bc *= math.exp(-pair.dist_sq / (4.0 * (pair.var0 + pair.var1)))
    return -1.0 + bc


def monte_carlo_bayes_error(pair: GaussianPair, prior_p0: float = 0.5,
                            n_draws: int = 10**6, seed: int = 0,
                            batch: int = 1 << 18) -> tuple[float, float]:
    """Sampling estimate of the Bayes error and its binomial standard error.

    Draws are made in fixed-size batches from one generator, so the result
    depends only on ``seed`` and ``n_draws``.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    coef = bayes_coefficients(pair, prior_p0)
    rng = np.random.default_rng(seed)
    F = pair.dim
    wrong = 0
    done = 0
    while done < n_draws:
        m = min(batch, n_draws - done)
        z = rng.random(m) >= prior_p0
        noise = rng.standard_normal((m, F))
        mean = np.where(z[:, None], pair.mean1, pair.mean0)
        sd = np.where(z, math.sqrt(pair.var1), math.sqrt(pair.var0))
        x = mean + sd[:, None] * noise
        pred1 = coef.q(x) <= 0
        wrong += int(np.count_nonzero(pred1 != z))
        done += m
    est = wrong / n_draws
    return est, math.sqrt(est * (1 - est) / n_draws)


def concentration_bound(D: float, V: float, t: float, F: int) -> float:
    """Concentration bound ``2F exp(-(D - t/sqrt(F))^2 / V)``.

    Values above 1 are returned as-is (vacuous bound).
    """
    if not V > 0:
        raise ValueError(f"V must be positive, got {V}")
    if D < 0:
        raise ValueError("D must be nonnegative")
    gap = D - t / math.sqrt(F)
    return 2.0 * F * math.exp(-gap * gap / V)


def variance_fp(lo: float, hi: float) -> float:
    """Variance proxy for raw features bounded in ``[lo, hi]``."""
    return (hi - lo) ** 2


def variance_lp(lo: float, hi: float, deg_v: float, deg_j: float) -> float:
    """Variance proxy after mean aggregation at nodes with degrees ``deg_v``, ``deg_j``."""
    return (1.0 / (2 * deg_v) + 1.0 / (2 * deg_j)) * (hi - lo) ** 2


def variance_hp(lo: float, hi: float, deg_v: float, deg_j: float) -> float:
    """Variance proxy for the high-pass residual."""
    return (1.0 + 1.0 / (2 * deg_v) + 1.0 / (2 * deg_j)) * (hi - lo) ** 2


def d_hp_distance(mu_v, mu_tilde_v, mu_j, mu_tilde_j) -> float:
    """Relative centre distance ``|(mu_v - mu~_v) - (mu_j - mu~_j)|``."""
    diff = (np.asarray(mu_v, float) - np.asarray(mu_tilde_v, float)) \
        - (np.asarray(mu_j, float) - np.asarray(mu_tilde_j, float))
    return float(np.linalg.norm(diff))


def default_h_grid() -> np.ndarray:
    return np.linspace(0.005, 0.955, 191)


@dataclass
class SweepResult:
    h_grid: np.ndarray
    measures: tuple
    values: dict = field(default_factory=dict)   # (channel, column) -> vector
    regime: list = field(default_factory=list)

    def columns(self) -> list[str]:
        cols = []
        for ch in CHANNEL_PRIORITY:
            for m in self.measures:
                for sub in _MEASURE_COLUMNS[m]:
                    cols.append(f"{ch.value}_{sub}")
        return cols

    def column(self, channel: Channel, name: str) -> np.ndarray:
        return self.values[(channel, name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        writer.writerow(["h"] + cols + ["regime"])
        keys = [(Channel(c.split("_", 1)[0]), c.split("_", 1)[1]) for c in cols]
        for i, h in enumerate(self.h_grid):
            row = [repr(float(h))]
            row += [repr(float(self.values[k][i])) for k in keys]
            row.append(self.regime[i] if self.regime else "")
            writer.writerow(row)
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {"h": [float(h) for h in self.h_grid]}
        for ch in CHANNEL_PRIORITY:
            out[ch.value] = {
                sub: [float(v) for v in self.values[(ch, sub)]]
                for m in self.measures for sub in _MEASURE_COLUMNS[m]
            }
        out["regime"] = list(self.regime)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


_MEASURE_COLUMNS = {
    "pbe": ("pbe",),
    "dngj": ("dngj", "ennd", "nvr"),
    "nswd": ("nswd",),
    "nshd": ("nshd",),
}


def _point(p, h, measures):
    pairs = filtered_params(p.with_h(h))
    out = {}
    for ch in CHANNEL_PRIORITY:
        pair = pairs[ch]
        if "pbe" in measures:
            out[(ch, "pbe")] = pbe(pair, p.prior_p0)
        if "dngj" in measures:
            total, ennd, nvr = d_ngj(pair)
            if p.prior_p0 != 0.5:
                total = d_ngj_prior(pair, p.prior_p0)
            out[(ch, "dngj")] = total
            out[(ch, "ennd")] = ennd
            out[(ch, "nvr")] = nvr
        if "nswd" in measures:
            out[(ch, "nswd")] = nswd(pair)
        if "nshd" in measures:
            out[(ch, "nshd")] = nshd(pair)
    return out


def _regime(pbes):
    best = None
    for ch in CHANNEL_PRIORITY:
        if best is None or pbes[ch] < pbes[best]:
            best = ch
    return best.value.upper()


def sweep(p: CsbmhParams, h_grid: Iterable[float] | None = None,
          measures: Iterable[str] = ALL_MEASURES, threads: int = 1) -> SweepResult:
    """Evaluate the requested measures on every channel along ``h_grid``.

    Each grid point is labelled with the channel of lowest PBE; ties go to
    FP, then LP, then HP.  ``pbe`` is always evaluated because the regime
    labels depend on it.  With an unbalanced prior the ``dngj`` column holds
    the prior-weighted value while ``ennd``/``nvr`` keep the balanced split.
    """
    grid = default_h_grid() if h_grid is None else np.asarray(list(h_grid), dtype=np.float64)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("h grid must be a nonempty vector")
    if np.any(grid < 0) or np.any(grid > 1):
        raise ValueError("h grid values must lie in [0, 1]")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("h grid must be strictly increasing")
    requested = [m for m in ALL_MEASURES if m in set(measures)]
    unknown = set(measures) - set(ALL_MEASURES)
    if unknown:
        raise ValueError(f"unknown measures: {sorted(unknown)}")
    if "pbe" not in requested:
        requested.insert(0, "pbe")
    requested = tuple(requested)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(lambda h: _point(p, h, requested), grid))
    else:
        points = [_point(p, h, requested) for h in grid]

    result = SweepResult(grid, requested)
    for key in points[0]:
        result.values[key] = np.array([pt[key] for pt in points])
    result.regime = [_regime({ch: pt[(ch, "pbe")] for ch in CHANNEL_PRIORITY}) for pt in points]
    return result


def params_from_json(text: str) -> tuple[CsbmhParams, np.ndarray | None]:
    """Parse a sweep config; returns params (with ``h`` unset) and the grid."""
    cfg = json.loads(text)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    required = ("mu0", "mu1", "sigma0_sq", "sigma1_sq", "d0", "d1")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ValueError(f"config missing keys: {missing}")
    params = CsbmhParams(cfg["mu0"], cfg["mu1"], float(cfg["sigma0_sq"]),
                         float(cfg["sigma1_sq"]), float(cfg["d0"]), float(cfg["d1"]),
                         prior_p0=float(cfg.get("prior_p0", 0.5)))
    grid = cfg.get("h_grid")
    return params, None if grid is None else np.asarray(grid, dtype=np.float64)
