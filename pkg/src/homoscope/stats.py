"""Welch's two-sample t-test and the Student-t CDF it relies on."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

__all__ = ["Alternative", "TTestResult", "student_t_cdf", "welch_ttest"]


class Alternative(enum.Enum):
    """Alternative hypothesis about ``mean(a) - mean(b)``."""

    LESS = "less"
    GREATER = "greater"
    TWO_SIDED = "two-sided"


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    dof: float
    p_value: float
    alternative: Alternative

    def to_dict(self):
        return {
            "t_stat": self.t_stat,
            "dof": self.dof,
            "p_value": self.p_value,
            "alternative": self.alternative.value,
        }


def student_t_cdf(t: float, dof: float) -> float:
    """P(T <= t) for Student's t with ``dof`` degrees of freedom.

    Uses the regularised incomplete beta function on the tail closest to
    zero so that neither tail loses precision to cancellation.
    """
    if not dof > 0:
        raise ValueError(f"dof must be positive, got {dof}")
    t = float(t)
    if math.isnan(t):
        return math.nan
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    # tail = P(T > |t|) = 0.5 * I_{dof/(dof+t^2)}(dof/2, 1/2)
    t2 = t * t
    # for small |t| the argument dof/(dof+t^2) rounds towards 1 and loses t,
    # so use the complementary integral while the tail is still large
    tail = 0.5 - 0.5 * betainc(0.5, 0.5 * dof, t2 / (dof + t2))
    if tail < 0.1:
        tail = 0.5 * betainc(0.5 * dof, 0.5, dof / (dof + t2))
    return float(tail) if t < 0 else float(1.0 - tail)


def _p_from_t(t, dof, alternative):
    if alternative is Alternative.LESS:
        return student_t_cdf(t, dof)
    if alternative is Alternative.GREATER:
        return student_t_cdf(-t, dof)
    return min(1.0, 2.0 * student_t_cdf(-abs(t), dof))


def welch_ttest(a, b, alternative: Alternative = Alternative.TWO_SIDED,
                equal_var: bool = False) -> TTestResult:
    """Two independent samples t-test for ``mean(a)`` vs ``mean(b)``.

    ``Alternative.LESS`` tests ``mean(a) < mean(b)``.  The default is the
    unequal-variance (Welch) form with Welch-Satterthwaite degrees of
    freedom; ``equal_var=True`` gives the pooled-variance test.

    When both samples are constant the statistic is degenerate: equal means
    give ``t = 0`` (p = 0.5 one-sided), unequal means give ``t = +-inf`` and
    a p-value of 0 or 1 depending on direction.
    """
    alternative = Alternative(alternative)
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError(f"each sample needs at least 2 values, got {na} and {nb}")
    ma, mb = float(np.mean(a)), float(np.mean(b))
    va, vb = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))
    diff = ma - mb

    if equal_var:
        dof = float(na + nb - 2)
        pooled = ((na - 1) * va + (nb - 1) * vb) / dof
        se2 = pooled * (1.0 / na + 1.0 / nb)
    else:
        qa, qb = va / na, vb / nb
        se2 = qa + qb
        if se2 > 0:
            denom = 0.0
            if qa > 0:
                denom += qa * qa / (na - 1)
            if qb > 0:
                denom += qb * qb / (nb - 1)
            dof = se2 * se2 / denom
        else:
            dof = float(na + nb - 2)

    if se2 == 0.0:
        if diff == 0.0:
            t = 0.0
        else:
            t = math.copysign(math.inf, diff)
    else:
        t = diff / math.sqrt(se2)
    p = _p_from_t(t, dof, alternative)
    return TTestResult(t_stat=float(t), dof=float(dof), p_value=float(p), alternative=alternative)
