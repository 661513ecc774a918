"""CDFs of normal, noncentral chi-square and generalized chi-square variables.

A generalized chi-square variable here is

    W = sum_i w_i * Y_i + X + offset,   Y_i ~ chi2'(k_i, lambda_i),  X ~ N(m, s^2)

with independent components.  Its CDF is obtained by Imhof's inversion of
the characteristic function,

    P(W <= x) = 1/2 - (1/pi) * int_0^inf sin(theta(u)) / (u rho(u)) du,

using scipy's adaptive quadrature for the finite part and the QAWF Fourier
routine for the oscillatory tail.

The integrand is evaluated in a *centred* parametrisation that only needs
``nu_i = lambda_i * w_i**2`` and the location ``sum_i lambda_i w_i + m +
offset``.  Quadratic forms with a tiny quadratic coefficient have huge
``lambda_i`` and ``offset`` that nearly cancel; :func:`quadratic_form_cdf`
builds the centred quantities directly and so never forms the cancelling
pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import erfc, gammainc, gammaln

from .errors import AccuracyError

__all__ = [
    "DEFAULT_TOL",
    "GChi2Spec",
    "chi2_cdf",
    "gchi2_cdf",
    "noncentral_chi2_cdf",
    "normal_cdf",
    "quadratic_form_cdf",
]

DEFAULT_TOL = 1e-6
# Poisson weight mass allowed outside the summation window
SERIES_TAIL = 1e-12
# above this noncentrality the Poisson window gets long and the argument
# x/w loses digits, so single-term CDFs go through the centred inversion
LAMBDA_SERIES_MAX = 1e6
# quadratic coefficients below this are treated as exactly zero
WEIGHT_EPS = 1e-12

_SQRT2 = math.sqrt(2.0)


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return float(0.5 * erfc(-z / _SQRT2))


def chi2_cdf(k: float, x: float) -> float:
    """Central chi-square CDF with ``k`` degrees of freedom."""
    if x <= 0:
        return 0.0
    return float(gammainc(0.5 * k, 0.5 * x))


def _poisson_window(mu):
    """Index range and weights covering all but SERIES_TAIL of Poisson(mu)."""
    spread = 10.0 * math.sqrt(mu) + 30.0
    while True:
        mode = math.floor(mu)
        lo = max(0, int(mode - spread))
        hi = int(mode + spread) + 1
        j = np.arange(lo, hi + 1, dtype=np.float64)
        logw = -mu + j * math.log(mu) - gammaln(j + 1.0)
        weights = np.exp(logw)
        if 1.0 - weights.sum() <= SERIES_TAIL or spread > 1e3 * (math.sqrt(mu) + 1):
            return j, weights
        spread *= 2.0


def noncentral_chi2_cdf(k: float, lam: float, x: float) -> float:
    """Noncentral chi-square CDF as a Poisson mixture of central CDFs.

    The mixture sum covers a window around the modal Poisson index that is
    widened until the neglected Poisson mass is below 1e-12.
    """
    if k <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {k}")
    if lam < 0:
        raise ValueError(f"noncentrality must be nonnegative, got {lam}")
    if not math.isfinite(x):
        if math.isnan(x):
            return math.nan
        return 1.0 if x > 0 else 0.0
    if x <= 0:
        return 0.0
    if lam == 0:
        return chi2_cdf(k, x)
    if lam > LAMBDA_SERIES_MAX:
        return _centred_cdf(np.array([1.0]), np.array([float(k)]), np.array([float(lam)]),
                            0.0, x - lam, DEFAULT_TOL, lam_w=np.array([float(lam)]))
    j, weights = _poisson_window(0.5 * lam)
    total = float(np.dot(weights, gammainc(0.5 * k + j, 0.5 * x)))
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class GChi2Spec:
    """Weighted sum of noncentral chi-squares plus a Gaussian and a constant.

    ``terms`` holds ``(weight, dof, noncentrality)`` triples.
    """

    terms: Sequence[tuple[float, int, float]] = ()
    mean: float = 0.0
    stdev: float = 0.0
    offset: float = 0.0
    _w: np.ndarray = field(init=False, repr=False, compare=False)
    _k: np.ndarray = field(init=False, repr=False, compare=False)
    _lam: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple((float(w), int(k), float(lam)) for w, k, lam in self.terms)
        object.__setattr__(self, "terms", terms)
        for w, k, lam in terms:
            if w == 0 or not math.isfinite(w):
                raise ValueError(f"term weights must be finite and nonzero, got {w}")
            if k < 1:
                raise ValueError(f"term dof must be >= 1, got {k}")
            if lam < 0 or not math.isfinite(lam):
                raise ValueError(f"noncentrality must be finite and >= 0, got {lam}")
        if self.stdev < 0:
            raise ValueError("Gaussian stdev must be nonnegative")
        if not terms and self.stdev == 0:
            raise ValueError("spec needs at least one term or a positive Gaussian stdev")
        object.__setattr__(self, "_w", np.array([t[0] for t in terms]))
        object.__setattr__(self, "_k", np.array([t[1] for t in terms], dtype=np.float64))
        object.__setattr__(self, "_lam", np.array([t[2] for t in terms]))

    @property
    def mean_value(self) -> float:
        return float(np.sum(self._w * (self._k + self._lam)) + self.mean + self.offset)

    @property
    def variance(self) -> float:
        return float(2.0 * np.sum(self._w ** 2 * (self._k + 2.0 * self._lam)) + self.stdev ** 2)

    def negated(self) -> "GChi2Spec":
        """Spec of ``-W``."""
        return GChi2Spec([(-w, k, lam) for w, k, lam in self.terms],
                         -self.mean, self.stdev, -self.offset)


def _gaussian_cdf(y, sd):
    if sd == 0:
        return 1.0 if y >= 0 else 0.0
    return normal_cdf(y / sd)


def gchi2_cdf(spec: GChi2Spec, x: float, tol: float = DEFAULT_TOL) -> float:
    """P(W <= x) for the generalized chi-square variable described by ``spec``.

    Single-term specs go to :func:`noncentral_chi2_cdf`; specs without a
    quadratic part go to :func:`normal_cdf`.  Everything else is inverted
    numerically; :class:`AccuracyError` is raised if the combined quadrature
    and truncation error estimate exceeds ``tol``.
    """
    y = float(x) - spec.offset - spec.mean
    w, k, lam = spec._w, spec._k, spec._lam
    if len(w) == 0 or np.all(np.abs(w) < WEIGHT_EPS):
        centre = float(np.sum(w * (k + lam)))
        sd = math.sqrt(2.0 * float(np.sum(w ** 2 * (k + 2.0 * lam))) + spec.stdev ** 2)
        return _gaussian_cdf(y - centre, sd)
    if spec.stdev == 0:
        if len(w) == 1 and lam[0] <= LAMBDA_SERIES_MAX:
            if w[0] > 0:
                return noncentral_chi2_cdf(k[0], lam[0], y / w[0])
            return 1.0 - noncentral_chi2_cdf(k[0], lam[0], y / w[0])
        if np.all(w > 0) and y <= 0:
            return 0.0
        if np.all(w < 0) and y >= 0:
            return 1.0
    lam_w = lam * w
    centre = float(np.sum(lam_w))
    return _centred_cdf(w, k, lam * w * w, spec.stdev, y - centre, tol, lam_w=lam_w)


def quadratic_form_cdf(a: float, b, c: float, mean, var: float, x: float = 0.0,
                       tol: float = DEFAULT_TOL) -> float:
    """P(a |X|^2 + b.X + c <= x) for X ~ N(mean, var * I).

    Writing ``X = mean + sqrt(var) * Y`` turns the form into
    ``a*var*chi2'(F, lam) + xi`` with ``lam = |mean/sigma + b/(2 a sigma)|^2``
    and ``xi = c - b.b/(4a)``.  Moderate ``lam`` uses that representation
    directly; large ``lam`` (tiny ``a``) uses the centred inversion, whose
    inputs ``var*|a mean + b/2|^2`` and ``Q(mean)`` stay well conditioned.
    """
    b = np.asarray(b, dtype=np.float64).ravel()
    mean = np.asarray(mean, dtype=np.float64).ravel()
    F = len(mean)
    q_mean = a * float(mean @ mean) + float(b @ mean) + c
    y = float(x) - q_mean
    if abs(a) < WEIGHT_EPS:
        sd = math.sqrt(var * float(b @ b))
        return _gaussian_cdf(y, sd)
    sigma = math.sqrt(var)
    w = a * var
    shift = mean / sigma + b / (2.0 * a * sigma)
    lam = float(shift @ shift)
    if lam <= LAMBDA_SERIES_MAX:
        xi = c - float(b @ b) / (4.0 * a)
        return gchi2_cdf(GChi2Spec([(w, F, lam)], offset=xi), x, tol)
    g = a * mean + 0.5 * b
    nu = var * float(g @ g)
    # lam*w + xi collapses to Q(mean), so y is already the centred argument
    return _centred_cdf(np.array([w]), np.array([float(F)]), np.array([nu]), 0.0,
                        y, tol, lam_w=np.array([lam * w]))


def _tail_bound(U, w, k, nu, s):
    """Upper bound on (1/pi) * int_U^inf du / (u rho(u))."""
    ktot = float(np.sum(k))
    if ktot == 0:
        return math.inf
    log_b = (math.log(2.0 / (math.pi * ktot))
             - 0.5 * ktot * math.log(U)
             - float(np.sum(0.5 * k * np.log(np.abs(w))))
             - 0.5 * float(np.sum(nu * U * U / (1.0 + w * w * U * U)))
             - s * s * U * U / 8.0)
    return math.exp(min(log_b, 700.0))


def _truncation_point(w, k, nu, s, target):
    U = 1.0
    if _tail_bound(U, w, k, nu, s) <= target:
        while U > 1e-8 and _tail_bound(U / 2, w, k, nu, s) <= target:
            U /= 2
        return U
    while _tail_bound(U, w, k, nu, s) > target:
        U *= 2.0
        if U > 1e300:
            return math.inf
    return U


def _centred_cdf(w, k, nu, s, yc, tol, lam_w):
    """Imhof inversion with the location removed from the phase.

    ``yc`` is ``x`` minus ``sum(lam*w) + m + offset``.  The phase is

        theta(u) = 1/2 sum[k atan(w u) - nu w u^3 / (1 + w^2 u^2)] - yc u / 2

    which equals the textbook phase with ``lam*w*u`` moved into ``yc``.
    """
    w = np.asarray(w, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    s = float(s)

    def log_rho(u):
        wu2 = (w * u) ** 2
        return float(np.sum(0.25 * k * np.log1p(wu2) + 0.5 * nu * u * u / (1.0 + wu2))
                     + s * s * u * u / 8.0)

    def integrand(u):
        if u == 0.0:
            # limit of sin(theta)/u as u -> 0
            return 0.5 * (float(np.sum(k * w)) - yc)
        wu = w * u
        theta = 0.5 * float(np.sum(k * np.arctan(wu) - nu * w * u ** 3 / (1.0 + wu * wu))) \
            - 0.5 * yc * u
        return math.sin(theta) * math.exp(-log_rho(u)) / u

    trunc_target = tol / 10.0
    U_trunc = _truncation_point(w, k, nu, s, trunc_target)
    U_split = 100.0 / float(np.min(np.abs(w)))
    use_tail = U_trunc > U_split
    U0 = U_split if use_tail else U_trunc

    # phase speed bound, used to chunk [0, U0] into a few periods per piece
    omega = 0.5 * (abs(yc) + float(np.sum(np.abs(k * w))) + float(np.sum(nu / np.abs(w))))
    n_chunks = int(min(4000, max(1, math.ceil(U0 * omega / (4 * math.pi)))))
    edges = np.linspace(0.0, U0, n_chunks + 1)
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(integrand, lo, hi, limit=200,
                                    epsabs=tol / (20.0 * n_chunks), epsrel=0.0)
            total += val
            err += e
        if use_tail:
            # textbook phase: atan terms plus a bounded rational term, both
            # slowly varying for u >> 1/|w|; the linear part goes to QAWF
            y_orig = yc + float(np.sum(lam_w))
            om = 0.5 * y_orig

            def phi(u):
                wu = w * u
                return 0.5 * float(np.sum(k * np.arctan(wu) + lam_w * u / (1.0 + wu * wu)))

            def amp(u):
                # exp(-log_rho) underflows to 0 instead of overflowing
                return math.exp(-log_rho(u)) / u

            if om == 0.0:
                val, e = integrate.quad(lambda u: math.sin(phi(u)) * amp(u), U0, np.inf,
                                        limit=500, epsabs=tol / 20.0, epsrel=0.0)
                total += val
                err += e
            else:
                v1, e1 = integrate.quad(lambda u: math.sin(phi(u)) * amp(u), U0, np.inf,
                                        weight="cos", wvar=om, limlst=100, epsabs=tol / 20.0)
                v2, e2 = integrate.quad(lambda u: math.cos(phi(u)) * amp(u), U0, np.inf,
                                        weight="sin", wvar=om, limlst=100, epsabs=tol / 20.0)
                total += v1 - v2
                err += e1 + e2
            trunc = 0.0
        else:
            trunc = _tail_bound(U0, w, k, nu, s) if math.isfinite(U0) else 0.0

    achieved = err / math.pi + trunc
    if not math.isfinite(total) or achieved > tol:
        raise AccuracyError(achieved, tol)
    return min(1.0, max(0.0, 0.5 - total / math.pi))
